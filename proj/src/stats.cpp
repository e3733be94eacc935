#include "fisscan/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "fisscan/distributions.hpp"
#include "fisscan/errors.hpp"
#include "fisscan/parallel.hpp"

namespace fisscan {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

const char* stat_name(StatKind kind) {
  switch (kind) {
    case StatKind::F1:
      return "f1";
    case StatKind::F2:
      return "f2";
    case StatKind::NB:
      return "nb";
    case StatKind::FnB1:
      return "fnb1";
    case StatKind::FnB2:
      return "fnb2";
  }
  return "?";
}

StatKind parse_stat(const std::string& name) {
  if (name == "f1") return StatKind::F1;
  if (name == "f2") return StatKind::F2;
  if (name == "nb") return StatKind::NB;
  if (name == "fnb1") return StatKind::FnB1;
  if (name == "fnb2") return StatKind::FnB2;
  throw ConfigError("unknown statistic: " + name);
}

std::string SigmaSource::tag() const {
  if (mode == Mode::SilvermanGlobal) return "silverman";
  std::string s = "known:";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return s + buf;
}

SigmaSource SigmaSource::parse(const std::string& tag) {
  if (tag == "silverman") return silverman();
  if (tag.rfind("known:", 0) == 0) {
    const double v = std::stod(tag.substr(6));
    if (!(v > 0.0)) throw ConfigError("known sigma must be > 0");
    return known(v);
  }
  throw ConfigError("unknown sigma source: " + tag);
}

void StatConfig::validate() const {
  window.validate();
  if (angles.empty()) throw ConfigError("at least one angle required");
  for (std::size_t i = 0; i < angles.size(); ++i) {
    if (!(angles[i] >= 0.0 && angles[i] < std::numbers::pi)) {
      throw ConfigError("angles must lie in [0, pi)");
    }
    if (i > 0 && !(angles[i] > angles[i - 1])) {
      throw ConfigError("angles must be strictly increasing");
    }
  }
  if (sigma.mode == SigmaSource::Mode::Known && !(sigma.value > 0.0)) {
    throw ConfigError("known sigma must be > 0");
  }
}

std::vector<double> equidistant_angles(int count) {
  if (count < 1) throw ConfigError("angle count must be >= 1");
  std::vector<double> angles(count);
  for (int i = 0; i < count; ++i) angles[i] = i * std::numbers::pi / count;
  return angles;
}

bool HeatMap::valid_at(int row, int col) const { return std::isfinite(at(row, col)); }

double HeatMap::max_value() const {
  double best = -std::numeric_limits<double>::infinity();
  for (int row = anchors.row_lo; row <= anchors.row_hi; ++row) {
    for (int col = anchors.col_lo; col <= anchors.col_hi; ++col) {
      best = std::max(best, at(row, col));
    }
  }
  return best;
}

long long BoolMask::count_set() const {
  long long n = 0;
  for (std::uint8_t v : values) n += v;
  return n;
}

ScanEngine::ScanEngine(const StatConfig& config, int T) : config_(config), size_(T) {
  config_.validate();
  needs_f_ = config_.kind != StatKind::NB;
  needs_nb_ = config_.kind == StatKind::NB || config_.kind == StatKind::FnB1 ||
              config_.kind == StatKind::FnB2;

  auto add_mask = [&](Segment seg, double angle) {
    masks_.push_back(build_offset_mask(config_.window, seg, angle, T));
    std::vector<long long> lin;
    lin.reserve(masks_.back().offsets.size());
    for (const Offset& o : masks_.back().offsets) {
      lin.push_back(static_cast<long long>(o.dr) * T + o.dc);
    }
    linear_offsets_.push_back(std::move(lin));
    return static_cast<int>(masks_.size()) - 1;
  };

  per_angle_.resize(config_.angles.size());
  for (std::size_t i = 0; i < config_.angles.size(); ++i) {
    const double angle = config_.angles[i];
    if (needs_f_) {
      per_angle_[i].inner = add_mask(Segment::Inner, angle);
      per_angle_[i].upper = add_mask(Segment::Upper, angle);
      per_angle_[i].lower = add_mask(Segment::Lower, angle);
    }
    if (needs_nb_) {
      per_angle_[i].half_pos = add_mask(Segment::HalfPos, angle);
      per_angle_[i].half_neg = add_mask(Segment::HalfNeg, angle);
    }
  }
  anchors_ = valid_anchor_pixels(masks_, T);
}

double ScanEngine::masked_mean_scaled(const GrayField& field, int mask_index,
                                      int row, int col) const {
  const double* base = field.data() + static_cast<std::size_t>(row - 1) * size_ + (col - 1);
  double sum = 0.0;
  for (long long step : linear_offsets_[mask_index]) sum += base[step];
  return sum * size_ / static_cast<double>(masks_[mask_index].count());
}

Contrasts ScanEngine::contrasts_at(const GrayField& field, int angle_index,
                                   int row, int col) const {
  const AngleMasks& am = per_angle_[angle_index];
  Contrasts c;
  if (needs_f_) {
    const double inner = masked_mean_scaled(field, am.inner, row, col);
    c.upper_minus_inner = masked_mean_scaled(field, am.upper, row, col) - inner;
    c.lower_minus_inner = masked_mean_scaled(field, am.lower, row, col) - inner;
  }
  if (needs_nb_) {
    c.half_contrast = masked_mean_scaled(field, am.half_pos, row, col) -
                      masked_mean_scaled(field, am.half_neg, row, col);
  }
  return c;
}

double ScanEngine::stat_at(const GrayField& field, double sigma, int row, int col) const {
  if (!(sigma > 0.0)) throw std::domain_error("sigma must be > 0");
  double f = -std::numeric_limits<double>::infinity();
  double nb = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < per_angle_.size(); ++i) {
    const Contrasts c = contrasts_at(field, static_cast<int>(i), row, col);
    if (needs_f_) {
      const double cand =
          config_.kind == StatKind::F2 || config_.kind == StatKind::FnB2
              ? std::min(std::abs(c.upper_minus_inner), std::abs(c.lower_minus_inner))
              : std::min(c.upper_minus_inner, c.lower_minus_inner);
      f = std::max(f, cand);
    }
    if (needs_nb_) nb = std::max(nb, std::abs(c.half_contrast));
  }
  switch (config_.kind) {
    case StatKind::F1:
    case StatKind::F2:
      return f / sigma;
    case StatKind::NB:
      return nb / sigma;
    case StatKind::FnB1:
    case StatKind::FnB2:
      return std::max((f - nb) / sigma, 0.0);
  }
  return 0.0;
}

HeatMap ScanEngine::heatmap(const GrayField& field, double sigma, int threads) const {
  if (field.size() != size_) throw ConfigError("field size does not match scan engine");
  HeatMap hm;
  hm.size = size_;
  hm.anchors = anchors_;
  hm.values.assign(static_cast<std::size_t>(size_) * size_, kNaN);
  const int rows = anchors_.row_hi - anchors_.row_lo + 1;
  parallel_for(rows, threads, [&](std::int64_t r) {
    const int row = anchors_.row_lo + static_cast<int>(r);
    double* out = hm.values.data() + static_cast<std::size_t>(row - 1) * size_;
    for (int col = anchors_.col_lo; col <= anchors_.col_hi; ++col) {
      out[col - 1] = stat_at(field, sigma, row, col);
    }
  });
  return hm;
}

double ScanEngine::max_over_anchors(const GrayField& field, double sigma,
                                    int threads) const {
  if (field.size() != size_) throw ConfigError("field size does not match scan engine");
  const int rows = anchors_.row_hi - anchors_.row_lo + 1;
  std::vector<double> row_max(rows, -std::numeric_limits<double>::infinity());
  parallel_for(rows, threads, [&](std::int64_t r) {
    const int row = anchors_.row_lo + static_cast<int>(r);
    double best = -std::numeric_limits<double>::infinity();
    for (int col = anchors_.col_lo; col <= anchors_.col_hi; ++col) {
      best = std::max(best, stat_at(field, sigma, row, col));
    }
    row_max[r] = best;
  });
  return *std::max_element(row_max.begin(), row_max.end());
}

std::vector<std::pair<int, int>> ScanEngine::window_pixels(int row, int col) const {
  std::vector<std::pair<int, int>> all;
  for (const OffsetMask& m : masks_) {
    for (const Offset& o : m.offsets) all.emplace_back(row + o.dr, col + o.dc);
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

double local_sum(const GrayField& field, const OffsetMask& mask, int row, int col) {
  double sum = 0.0;
  for (const Offset& o : mask.offsets) {
    const int r = row + o.dr;
    const int c = col + o.dc;
    if (!field.in_range(r, c)) {
      throw std::out_of_range("window leaves the image at this anchor");
    }
    sum += field.at(r, c);
  }
  return sum;
}

double local_mean_scaled(const GrayField& field, const OffsetMask& mask, int row, int col) {
  if (mask.count() == 0) throw ConfigError("degenerate window: empty mask");
  return local_sum(field, mask, row, col) * field.size() /
         static_cast<double>(mask.count());
}

double stat_at(const GrayField& field, const StatConfig& config, double sigma,
               int row, int col) {
  ScanEngine engine(config, field.size());
  if (!engine.anchors().contains(row, col)) {
    throw std::out_of_range("anchor outside the valid anchor rectangle");
  }
  return engine.stat_at(field, sigma, row, col);
}

HeatMap heatmap(const GrayField& field, const StatConfig& config, double sigma,
                int threads) {
  ScanEngine engine(config, field.size());
  return engine.heatmap(field, sigma, threads);
}

double interpolated_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::domain_error("quantile of empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("quantile level outside [0,1]");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(i);
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

SigmaEstimate silverman_sigma(const GrayField& field) {
  const std::size_t n = field.pixel_count();
  if (n < 4) throw std::domain_error("silverman estimate needs at least 4 pixels");
  std::vector<double> sorted = field.values();
  std::sort(sorted.begin(), sorted.end());
  const double iqr =
      interpolated_quantile(sorted, 0.75) - interpolated_quantile(sorted, 0.25);
  SigmaEstimate est;
  est.value = iqr / kNormalIqr;
  est.degenerate = !(est.value > 0.0);
  est.method = "silverman";
  est.sample_size = n;
  return est;
}

double silverman_limit(const NoiseModel& model) {
  model.validate();
  switch (model.kind) {
    case NoiseModel::Kind::Gaussian:
      return model.sd;
    case NoiseModel::Kind::StudentT:
      return (student_t_quantile(0.75, model.nu) - student_t_quantile(0.25, model.nu)) /
             kNormalIqr;
    case NoiseModel::Kind::Exponential:
      return (exponential_quantile(0.75, model.rate) -
              exponential_quantile(0.25, model.rate)) /
             kNormalIqr;
    case NoiseModel::Kind::Gamma:
      return (gamma_quantile(0.75, model.shape, model.rate) -
              gamma_quantile(0.25, model.shape, model.rate)) /
             kNormalIqr;
    case NoiseModel::Kind::MovingAverage: {
      // Gaussian marginal with known scale.
      double ss = 0.0;
      for (double w : model.ma_weights) ss += w * w;
      return model.innovation_sd * std::sqrt(ss);
    }
  }
  return 0.0;
}

BoolMask significance_mask(const HeatMap& hm, double beta) {
  if (!std::isfinite(beta)) throw std::domain_error("threshold must be finite");
  BoolMask mask;
  mask.size = hm.size;
  mask.anchors = hm.anchors;
  mask.values.assign(static_cast<std::size_t>(hm.size) * hm.size, 0);
  for (int row = hm.anchors.row_lo; row <= hm.anchors.row_hi; ++row) {
    for (int col = hm.anchors.col_lo; col <= hm.anchors.col_hi; ++col) {
      if (hm.at(row, col) >= beta) mask.set(row, col, true);
    }
  }
  return mask;
}

SigmaEstimate resolve_sigma(const GrayField& field, const SigmaSource& source) {
  if (source.mode == SigmaSource::Mode::Known) {
    SigmaEstimate est;
    est.value = source.value;
    est.degenerate = !(source.value > 0.0);
    est.method = "known";
    est.sample_size = 0;
    return est;
  }
  return silverman_sigma(field);
}

}  // namespace fisscan
