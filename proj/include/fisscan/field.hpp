#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fisscan/geometry.hpp"

namespace fisscan {

// T x T grid of gray values. Pixel (row, col) with 1-based indices sits at
// rescaled position (row/T, col/T); storage is row-major.
class GrayField {
 public:
  GrayField() = default;
  explicit GrayField(int size, double fill = 0.0)
      : size_(size), values_(static_cast<std::size_t>(size) * size, fill) {}

  int size() const { return size_; }
  std::size_t pixel_count() const { return values_.size(); }

  double at(int row, int col) const { return values_[index(row, col)]; }
  double& at(int row, int col) { return values_[index(row, col)]; }
  bool in_range(int row, int col) const {
    return row >= 1 && row <= size_ && col >= 1 && col <= size_;
  }

  const double* data() const { return values_.data(); }
  double* data() { return values_.data(); }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row - 1) * size_ + (col - 1);
  }

  int size_ = 0;
  std::vector<double> values_;
};

// Stationary noise models. The i.i.d. exponential and gamma variants are
// centered by subtracting the distribution mean, so every model has mean
// zero. MovingAverage convolves i.i.d. standard normal innovations drawn on
// the enlarged grid {1-m,...,T+m}^2 with the given (2m+1)x(2m+1) weights and
// scales by innovation_sd; it is exactly 2m-dependent.
struct NoiseModel {
  enum class Kind { Gaussian, StudentT, Exponential, Gamma, MovingAverage };

  Kind kind = Kind::Gaussian;
  double sd = 1.0;             // Gaussian
  double nu = 3.0;             // StudentT, requires nu > 2
  double rate = 1.0;           // Exponential / Gamma
  double shape = 1.0;          // Gamma
  double innovation_sd = 1.0;  // MovingAverage
  int ma_radius = 0;           // MovingAverage: weights span offsets in [-m, m]^2
  std::vector<double> ma_weights;  // row-major (2m+1)^2

  void validate() const;

  static NoiseModel gaussian(double sd = 1.0);
  static NoiseModel student_t(double nu);
  static NoiseModel exponential(double rate);
  static NoiseModel gamma(double shape, double rate);
  static NoiseModel moving_average(int radius, std::vector<double> weights,
                                   double innovation_sd = 1.0);
  static NoiseModel moving_average_all_ones(int radius, double innovation_sd = 1.0);

  // CLI tag, e.g. "gauss:1", "t:4", "exp:1", "gamma:4:2", "ma:1:1".
  std::string tag() const;
  static NoiseModel parse(const std::string& tag);
};

// Constant baseline plus one rectangular dip.
struct SignalSpec {
  double baseline = 0.0;
  RectAnomaly anomaly;
};

// Deterministic given (model, T, seed, replicate). Row j of the field (or of
// the innovation grid for moving averages) is drawn from the stream
// (seed, replicate, j).
GrayField generate_noise(const NoiseModel& model, int T, std::uint64_t seed,
                         std::uint64_t replicate = 0);

// output = baseline - amplitude * 1{pixel in rectangle} + field.
GrayField inject_anomaly(const GrayField& field, const SignalSpec& signal);

// Long-run variance: the marginal variance plus all lagged covariances.
double long_run_variance(const NoiseModel& model);

// Smallest M such that pixels further apart than M (sup norm) are independent.
int m_dependence_range(const NoiseModel& model);

// Pixels of the anomaly rectangle on the T-grid.
std::vector<std::pair<int, int>> anomaly_pixels(const RectAnomaly& rect, int T);

}  // namespace fisscan
