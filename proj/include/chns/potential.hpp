/// @file potential.hpp
/// @brief Double-obstacle potential, its Yosida approximation and the mollified family.
///
/// The mollifier is zeta(s) = 15/16 (1 - s^2)^2 on [-1, 1]. Convolving the
/// ramp max(s, 0) with zeta gives the C^2 spline r(y) below; every quantity of
/// the family is a shifted, scaled copy of r, its derivative Z or its primitive P.
///
///   gamma~(s)  = (theta/alpha) [ r((s - psi2)/theta) - r((psi1 - s)/theta) ]
///   gamma~'(s) = (1/alpha)     [ Z((s - psi2)/theta) + Z((psi1 - s)/theta) ]
///   psi0(s)    = (theta^2/alpha) [ P((s - psi2)/theta) - P(-psi2/theta)
///                                + P((psi1 - s)/theta) - P(psi1/theta) ]

#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "chns/grid.hpp"

namespace chns {

namespace detail {

inline double real_part(double x) { return x; }
inline double real_part(const std::complex<double>& x) { return x.real(); }

/// Smoothed ramp: integral of (y - t)_+ zeta(t) dt.
template <class T>
T ramp(const T& y) {
  const double yr = real_part(y);
  if (yr <= -1.0) return T(0.0);
  if (yr >= 1.0) return y;
  const T y2 = y * y;
  return 5.0 / 32.0 + y / 2.0 + y2 * (15.0 / 32.0 + y2 * (-5.0 / 32.0 + y2 / 32.0));
}

/// Cumulative mollifier mass, ramp'.
template <class T>
T ramp_d1(const T& y) {
  const double yr = real_part(y);
  if (yr <= -1.0) return T(0.0);
  if (yr >= 1.0) return T(1.0);
  const T y2 = y * y;
  return 0.5 + y * (15.0 / 16.0 + y2 * (-5.0 / 8.0 + y2 * 3.0 / 16.0));
}

/// ramp'' = zeta.
template <class T>
T ramp_d2(const T& y) {
  const double yr = real_part(y);
  if (yr <= -1.0 || yr >= 1.0) return T(0.0);
  const T a = 1.0 - y * y;
  return 15.0 / 16.0 * a * a;
}

/// Primitive of ramp vanishing at -infinity.
template <class T>
T ramp_int(const T& y) {
  const double yr = real_part(y);
  if (yr <= -1.0) return T(0.0);
  if (yr >= 1.0) return y * y / 2.0 + 1.0 / 14.0;
  const T y2 = y * y;
  return 1.0 / 28.0 +
         y * (5.0 / 32.0 + y * (0.25 + y * (5.0 / 32.0 + y2 * (-1.0 / 32.0 + y2 / 224.0))));
}

}  // namespace detail

/// Obstacle interval K = [psi1, psi2] and the concave coefficient kappa.
struct ObstacleInterval {
  double psi1 = -1.0;
  double psi2 = 1.0;
  double kappa = 1.0;

  /// Throws ConfigError unless psi1 < 0 < psi2 and kappa > 0.
  void validate() const;
  bool operator==(const ObstacleInterval&) const = default;
};

struct YosidaParams {
  double alpha = 0.2;
  double theta = 0.04;
  bool operator==(const YosidaParams&) const = default;
};

/// theta(alpha) = coeff * alpha^power. Parsed from "alpha^2", "0.5*alpha^2", ...
struct ThetaRule {
  double coeff = 1.0;
  double power = 2.0;

  static ThetaRule parse(const std::string& text);
  std::string str() const;
  double operator()(double alpha) const;
  bool operator==(const ThetaRule&) const = default;
};

double mollifier(double s);
double proj_K(double s, const ObstacleInterval& k);
/// (s - proj_K(s)) / alpha. Throws ParameterError for alpha <= 0.
double yosida(double s, double alpha, const ObstacleInterval& k);
double obstacle_excess(double s, const ObstacleInterval& k);

/// One member of the mollified Yosida family.
class YosidaPotential {
 public:
  YosidaPotential() : YosidaPotential(ObstacleInterval{}, YosidaParams{}) {}
  /// Throws ParameterError unless alpha > 0, theta > 0, theta/alpha < 1 and
  /// 2 theta < psi2 - psi1.
  YosidaPotential(const ObstacleInterval& k, const YosidaParams& p);

  const ObstacleInterval& interval() const { return k_; }
  const YosidaParams& params() const { return p_; }
  double alpha() const { return p_.alpha; }
  double theta() const { return p_.theta; }
  double kappa() const { return k_.kappa; }

  template <class T>
  T gamma(const T& s) const {
    const double th = p_.theta;
    return th / p_.alpha * (detail::ramp<T>((s - k_.psi2) / th) - detail::ramp<T>((k_.psi1 - s) / th));
  }
  template <class T>
  T gamma_d1(const T& s) const {
    const double th = p_.theta;
    return (detail::ramp_d1<T>((s - k_.psi2) / th) + detail::ramp_d1<T>((k_.psi1 - s) / th)) / p_.alpha;
  }
  template <class T>
  T gamma_d2(const T& s) const {
    const double th = p_.theta;
    return (detail::ramp_d2<T>((s - k_.psi2) / th) - detail::ramp_d2<T>((k_.psi1 - s) / th)) /
           (p_.alpha * th);
  }
  template <class T>
  T psi0(const T& s) const {
    const double th = p_.theta;
    return th * th / p_.alpha *
           (detail::ramp_int<T>((s - k_.psi2) / th) - detail::ramp_int<double>(-k_.psi2 / th) +
            detail::ramp_int<T>((k_.psi1 - s) / th) - detail::ramp_int<double>(k_.psi1 / th));
  }

  double mollified_yosida(double s) const { return gamma(s); }
  double mollified_yosida_prime(double s) const { return gamma_d1(s); }
  double psi0_alpha(double s) const { return psi0(s); }

  CellField gamma(const CellField& f) const;
  CellField gamma_d1(const CellField& f) const;

  /// sup over the collar of |gamma~ - gamma~' (s - proj_K s)| * alpha / theta,
  /// sampled on n points per collar.
  double collar_ratio(int n = 20001) const;

 private:
  ObstacleInterval k_;
  YosidaParams p_;
};

double mollified_yosida(double s, const ObstacleInterval& k, const YosidaParams& p);
double mollified_yosida_prime(double s, const ObstacleInterval& k, const YosidaParams& p);
double psi0_alpha(double s, const ObstacleInterval& k, const YosidaParams& p);

/// Interval plus a strictly decreasing, positive alpha schedule.
struct PotentialFamily {
  ObstacleInterval interval;
  std::vector<double> schedule;
  ThetaRule theta_rule;

  /// alpha_n = alpha0 * factor^n, n = 0 .. n_stages-1.
  static PotentialFamily geometric(const ObstacleInterval& k, double alpha0, double factor,
                                   int n_stages, ThetaRule rule = {});
  void validate() const;
  YosidaPotential member(std::size_t n) const;
};

/// (max over cells of psi1 - f, max over cells of f - psi2), both clipped at 0.
std::pair<double, double> obstacle_violation(const CellField& f, const ObstacleInterval& k);

}  // namespace chns
