#include "clfpde/coefficient.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "clfpde/error.hpp"
#include "format.hpp"

namespace clfpde {

Coefficient Coefficient::constant(double value) { return Coefficient(value); }

Coefficient Coefficient::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) throw Error(ErrorCode::InvalidArgument, "polynomial needs at least one coefficient");
  Coefficient c;
  c.repr_ = Polynomial{std::move(coeffs)};
  return c;
}

Coefficient Coefficient::tabulated(std::vector<double> samples, int order) {
  if (order != 1 && order != 3)
    throw Error(ErrorCode::InvalidArgument, "tabulated interpolation order must be 1 or 3");
  if (samples.size() < static_cast<std::size_t>(order) + 1)
    throw Error(ErrorCode::InvalidArgument, "too few tabulated samples for interpolation order");
  Coefficient c;
  c.repr_ = Tabulated{std::move(samples), order};
  return c;
}

namespace {

// Lagrange interpolation on the uniform nodes start..start+order of a table
// with spacing h; returns value and derivative.
std::pair<double, double> lagrange(const std::vector<double>& s, int start, int order, double h,
                                   double x) {
  double value = 0.0, deriv = 0.0;
  for (int i = 0; i <= order; ++i) {
    const double xi = (start + i) * h;
    double li = 1.0, dli = 0.0;
    for (int m = 0; m <= order; ++m) {
      if (m == i) continue;
      const double xm = (start + m) * h;
      const double factor = (x - xm) / (xi - xm);
      dli = dli * factor + li / (xi - xm);
      li *= factor;
    }
    value += s[start + i] * li;
    deriv += s[start + i] * dli;
  }
  return {value, deriv};
}

std::pair<double, double> eval_table(const Coefficient::Tabulated& t, double x) {
  const int n = static_cast<int>(t.samples.size()) - 1;
  const double h = 1.0 / n;
  int cell = static_cast<int>(std::floor(x / h));
  cell = std::clamp(cell, 0, n - 1);
  int start = t.order == 1 ? cell : cell - 1;
  start = std::clamp(start, 0, n - t.order);
  return lagrange(t.samples, start, t.order, h, x);
}

}  // namespace

double Coefficient::operator()(double x) const {
  return std::visit(
      [x](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return r.value;
        } else if constexpr (std::is_same_v<T, Polynomial>) {
          double acc = 0.0;
          for (auto it = r.coeffs.rbegin(); it != r.coeffs.rend(); ++it) acc = acc * x + *it;
          return acc;
        } else {
          return eval_table(r, x).first;
        }
      },
      repr_);
}

double Coefficient::derivative(double x) const {
  return std::visit(
      [x](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, Polynomial>) {
          double acc = 0.0;
          for (std::size_t k = r.coeffs.size() - 1; k >= 1; --k) {
            acc = acc * x + static_cast<double>(k) * r.coeffs[k];
          }
          return acc;
        } else {
          return eval_table(r, x).second;
        }
      },
      repr_);
}

std::string Coefficient::to_string() const {
  return std::visit(
      [](const auto& r) -> std::string {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return fmt_double(r.value);
        } else if constexpr (std::is_same_v<T, Polynomial>) {
          return "poly: " + join_doubles(r.coeffs);
        } else {
          return "table(" + std::to_string(r.order) + "): " + join_doubles(r.samples);
        }
      },
      repr_);
}

Coefficient Coefficient::parse(const std::string& raw) {
  const std::string text = trim(raw);
  if (text.rfind("poly:", 0) == 0) return polynomial(parse_doubles(text.substr(5)));
  if (text.rfind("table(", 0) == 0) {
    const auto close = text.find("):");
    if (close == std::string::npos) throw Error(ErrorCode::ConfigInvalid, "malformed table coefficient: " + text);
    const int order = static_cast<int>(parse_double(text.substr(6, close - 6)));
    return tabulated(parse_doubles(text.substr(close + 2)), order);
  }
  return constant(parse_double(text));
}

}  // namespace clfpde
