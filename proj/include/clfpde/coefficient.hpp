#pragma once

#include <string>
#include <variant>
#include <vector>

namespace clfpde {

/// A scalar coefficient function on [0,1]: constant, polynomial, or tabulated.
///
/// Tabulated samples are taken uniformly on [0,1] and interpolated with a
/// local Lagrange polynomial of the given order (1 = piecewise linear,
/// 3 = cubic). Values outside [0,1] are obtained by extrapolating the end
/// pieces, which the discretization needs for half-node evaluations only at
/// interior points.
class Coefficient {
 public:
  struct Constant {
    double value = 0.0;
  };
  struct Polynomial {
    std::vector<double> coeffs;  // ascending powers
  };
  struct Tabulated {
    std::vector<double> samples;
    int order = 1;
  };

  Coefficient() = default;
  explicit Coefficient(double value) : repr_(Constant{value}) {}

  static Coefficient constant(double value);
  static Coefficient polynomial(std::vector<double> coeffs);
  static Coefficient tabulated(std::vector<double> samples, int order);

  double operator()(double x) const;
  double derivative(double x) const;

  bool is_constant() const { return std::holds_alternative<Constant>(repr_); }

  // Round-trippable textual form used by the config and artifact files:
  // "1.5", "poly: 1, 0.5", "table(3): 1, 1.1, 1.3".
  std::string to_string() const;
  static Coefficient parse(const std::string& text);

 private:
  std::variant<Constant, Polynomial, Tabulated> repr_{Constant{}};
};

}  // namespace clfpde
