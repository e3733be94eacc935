#include "fisscan/field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fisscan/rng.hpp"

namespace fisscan {

void NoiseModel::validate() const {
  switch (kind) {
    case Kind::Gaussian:
      if (!(sd > 0.0)) throw std::domain_error("gaussian noise requires sd > 0");
      break;
    case Kind::StudentT:
      if (!(nu > 2.0)) throw std::domain_error("student-t noise requires nu > 2");
      break;
    case Kind::Exponential:
      if (!(rate > 0.0)) throw std::domain_error("exponential noise requires rate > 0");
      break;
    case Kind::Gamma:
      if (!(shape > 0.0 && rate > 0.0)) {
        throw std::domain_error("gamma noise requires shape > 0 and rate > 0");
      }
      break;
    case Kind::MovingAverage: {
      if (ma_radius < 0) throw std::domain_error("moving average radius must be >= 0");
      const std::size_t side = 2 * static_cast<std::size_t>(ma_radius) + 1;
      if (ma_weights.size() != side * side) {
        throw std::domain_error("moving average needs (2m+1)^2 weights");
      }
      if (!(innovation_sd > 0.0)) {
        throw std::domain_error("moving average requires innovation sd > 0");
      }
      if (std::all_of(ma_weights.begin(), ma_weights.end(),
                      [](double w) { return w == 0.0; })) {
        throw std::domain_error("moving average needs at least one nonzero weight");
      }
      break;
    }
  }
}

NoiseModel NoiseModel::gaussian(double sd) {
  NoiseModel m;
  m.kind = Kind::Gaussian;
  m.sd = sd;
  return m;
}

NoiseModel NoiseModel::student_t(double nu) {
  NoiseModel m;
  m.kind = Kind::StudentT;
  m.nu = nu;
  return m;
}

NoiseModel NoiseModel::exponential(double rate) {
  NoiseModel m;
  m.kind = Kind::Exponential;
  m.rate = rate;
  return m;
}

NoiseModel NoiseModel::gamma(double shape, double rate) {
  NoiseModel m;
  m.kind = Kind::Gamma;
  m.shape = shape;
  m.rate = rate;
  return m;
}

NoiseModel NoiseModel::moving_average(int radius, std::vector<double> weights,
                                      double innovation_sd) {
  NoiseModel m;
  m.kind = Kind::MovingAverage;
  m.ma_radius = radius;
  m.ma_weights = std::move(weights);
  m.innovation_sd = innovation_sd;
  return m;
}

NoiseModel NoiseModel::moving_average_all_ones(int radius, double innovation_sd) {
  const std::size_t side = 2 * static_cast<std::size_t>(radius) + 1;
  return moving_average(radius, std::vector<double>(side * side, 1.0), innovation_sd);
}

namespace {

std::string trim_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::string NoiseModel::tag() const {
  switch (kind) {
    case Kind::Gaussian:
      return "gauss:" + trim_number(sd);
    case Kind::StudentT:
      return "t:" + trim_number(nu);
    case Kind::Exponential:
      return "exp:" + trim_number(rate);
    case Kind::Gamma:
      return "gamma:" + trim_number(shape) + ":" + trim_number(rate);
    case Kind::MovingAverage:
      return "ma:" + std::to_string(ma_radius) + ":" + trim_number(innovation_sd);
  }
  return "?";
}

NoiseModel NoiseModel::parse(const std::string& tag) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : tag) {
    if (ch == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  auto num = [&](std::size_t i) {
    if (i >= parts.size()) throw std::domain_error("noise tag missing parameter: " + tag);
    return std::stod(parts[i]);
  };
  NoiseModel m;
  if (parts[0] == "gauss") {
    m = gaussian(parts.size() > 1 ? num(1) : 1.0);
  } else if (parts[0] == "t") {
    m = student_t(num(1));
  } else if (parts[0] == "exp") {
    m = exponential(num(1));
  } else if (parts[0] == "gamma") {
    m = gamma(num(1), num(2));
  } else if (parts[0] == "ma") {
    m = moving_average_all_ones(static_cast<int>(num(1)), parts.size() > 2 ? num(2) : 1.0);
  } else {
    throw std::domain_error("unknown noise model tag: " + tag);
  }
  m.validate();
  return m;
}

namespace {

double draw_iid(const NoiseModel& model, StreamRng& rng) {
  switch (model.kind) {
    case NoiseModel::Kind::Gaussian:
      return model.sd * rng.normal();
    case NoiseModel::Kind::StudentT:
      return rng.student_t(model.nu);
    case NoiseModel::Kind::Exponential:
      return rng.exponential(model.rate) - 1.0 / model.rate;
    case NoiseModel::Kind::Gamma:
      return rng.gamma(model.shape, model.rate) - model.shape / model.rate;
    case NoiseModel::Kind::MovingAverage:
      break;
  }
  throw std::logic_error("draw_iid on non-iid model");
}

}  // namespace

GrayField generate_noise(const NoiseModel& model, int T, std::uint64_t seed,
                         std::uint64_t replicate) {
  if (T < 1) throw std::domain_error("field size must be >= 1");
  model.validate();
  GrayField field(T);
  if (model.kind != NoiseModel::Kind::MovingAverage) {
    for (int row = 1; row <= T; ++row) {
      StreamRng rng(seed, replicate, row);
      for (int col = 1; col <= T; ++col) {
        field.at(row, col) = draw_iid(model, rng);
      }
    }
    return field;
  }

  const int m = model.ma_radius;
  const int wide = T + 2 * m;
  std::vector<double> innovations(static_cast<std::size_t>(wide) * wide);
  for (int row = 1 - m; row <= T + m; ++row) {
    StreamRng rng(seed, replicate, row);
    double* out = innovations.data() + static_cast<std::size_t>(row - (1 - m)) * wide;
    for (int i = 0; i < wide; ++i) out[i] = rng.normal();
  }
  const int side = 2 * m + 1;
  for (int row = 1; row <= T; ++row) {
    for (int col = 1; col <= T; ++col) {
      double acc = 0.0;
      for (int a = -m; a <= m; ++a) {
        const double* eta = innovations.data() +
                            static_cast<std::size_t>(row + a - (1 - m)) * wide +
                            (col - (1 - m));
        const double* w = model.ma_weights.data() + static_cast<std::size_t>(a + m) * side;
        for (int b = -m; b <= m; ++b) acc += w[b + m] * eta[b];
      }
      field.at(row, col) = model.innovation_sd * acc;
    }
  }
  return field;
}

GrayField inject_anomaly(const GrayField& field, const SignalSpec& signal) {
  const int T = field.size();
  GrayField out = field;
  for (int row = 1; row <= T; ++row) {
    for (int col = 1; col <= T; ++col) {
      const Vec2 pos{static_cast<double>(row) / T, static_cast<double>(col) / T};
      double mu = signal.baseline;
      if (rect_contains(signal.anomaly, pos)) mu -= signal.anomaly.amplitude;
      out.at(row, col) += mu;
    }
  }
  return out;
}

double long_run_variance(const NoiseModel& model) {
  model.validate();
  switch (model.kind) {
    case NoiseModel::Kind::Gaussian:
      return model.sd * model.sd;
    case NoiseModel::Kind::StudentT:
      return model.nu / (model.nu - 2.0);
    case NoiseModel::Kind::Exponential:
      return 1.0 / (model.rate * model.rate);
    case NoiseModel::Kind::Gamma:
      return model.shape / (model.rate * model.rate);
    case NoiseModel::Kind::MovingAverage: {
      double sum = 0.0;
      for (double w : model.ma_weights) sum += w;
      return model.innovation_sd * model.innovation_sd * sum * sum;
    }
  }
  return 0.0;
}

int m_dependence_range(const NoiseModel& model) {
  return model.kind == NoiseModel::Kind::MovingAverage ? 2 * model.ma_radius : 0;
}

std::vector<std::pair<int, int>> anomaly_pixels(const RectAnomaly& rect, int T) {
  std::vector<std::pair<int, int>> pixels;
  for (int row = 1; row <= T; ++row) {
    for (int col = 1; col <= T; ++col) {
      if (rect_contains(rect, Vec2{static_cast<double>(row) / T,
                                   static_cast<double>(col) / T})) {
        pixels.emplace_back(row, col);
      }
    }
  }
  return pixels;
}

}  // namespace fisscan
