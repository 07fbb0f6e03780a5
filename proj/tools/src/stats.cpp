#include <algorithm>
#include <cmath>

#include <colprune/errors.hpp>

#include "colprune/experiments/experiments.hpp"

namespace colprune::experiments {

double median(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return std::isnan(v); }), values.end());
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("loglog_slope needs two or more paired points");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("loglog_slope needs positive values");
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw InvalidArgument("loglog_slope needs distinct x values");
  return sxy / sxx;
}

bool decays_by_factor(const std::vector<double>& trace, double factor, long window, double floor) {
  if (window <= 0) throw InvalidArgument("window must be positive");
  const auto w = static_cast<std::size_t>(window);
  for (std::size_t i = 0; i < trace.size(); i += w) {
    if (trace[i] < floor) return true;
    if (i + w >= trace.size()) return false;
    if (!(trace[i + w] <= trace[i] / factor) && !(trace[i + w] < floor)) return false;
  }
  return false;
}

double small_init_bound(Index d, Index k) {
  const double kd = static_cast<double>(k) * static_cast<double>(d);
  return 1.0 / (std::pow(static_cast<double>(k), 3) * static_cast<double>(d) * std::log(kd));
}

}  // namespace colprune::experiments
