#include "chns/potential.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "chns/errors.hpp"

namespace chns {

void ObstacleInterval::validate() const {
  if (!(psi1 < 0.0) || !(psi2 > 0.0))
    throw ConfigError("potential: require psi1 < 0 < psi2");
  if (!(kappa > 0.0)) throw ConfigError("potential.kappa must be > 0");
}

ThetaRule ThetaRule::parse(const std::string& text) {
  ThetaRule r;
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  double c = 1.0, p = 1.0;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%lf*alpha^%lf%c", &c, &p, &tail) == 2) {
    r.coeff = c;
    r.power = p;
  } else if (std::sscanf(s.c_str(), "alpha^%lf%c", &p, &tail) == 1) {
    r.power = p;
  } else if (s == "alpha") {
    r.power = 1.0;
  } else {
    throw ConfigError("potential.theta_rule: cannot parse '" + text + "' (expected c*alpha^p)");
  }
  if (!(r.coeff > 0.0) || !(r.power >= 1.0))
    throw ConfigError("potential.theta_rule: need coefficient > 0 and power >= 1");
  return r;
}

std::string ThetaRule::str() const {
  std::ostringstream os;
  os.precision(17);
  if (coeff != 1.0) os << coeff << "*";
  os << "alpha^" << power;
  return os.str();
}

double ThetaRule::operator()(double alpha) const { return coeff * std::pow(alpha, power); }

double mollifier(double s) { return detail::ramp_d2(s); }

double proj_K(double s, const ObstacleInterval& k) { return std::clamp(s, k.psi1, k.psi2); }

double yosida(double s, double alpha, const ObstacleInterval& k) {
  if (!(alpha > 0.0)) throw ParameterError("yosida: alpha must be > 0");
  return (s - proj_K(s, k)) / alpha;
}

double obstacle_excess(double s, const ObstacleInterval& k) { return s - proj_K(s, k); }

YosidaPotential::YosidaPotential(const ObstacleInterval& k, const YosidaParams& p) : k_(k), p_(p) {
  if (!(p.alpha > 0.0)) throw ParameterError("potential: alpha must be > 0");
  if (!(p.theta > 0.0)) throw ParameterError("potential: theta must be > 0");
  if (!(p.theta < p.alpha)) throw ParameterError("potential: theta/alpha must be < 1");
  if (!(k.psi1 < k.psi2)) throw ParameterError("potential: psi1 must be < psi2");
  if (!(2.0 * p.theta < k.psi2 - k.psi1))
    throw ParameterError("potential: mollifier width 2*theta exceeds the obstacle interval");
}

CellField YosidaPotential::gamma(const CellField& f) const {
  CellField out(f.grid);
  for (int c = 0; c < f.size(); ++c) out.values[c] = gamma(f.values[c]);
  return out;
}

CellField YosidaPotential::gamma_d1(const CellField& f) const {
  CellField out(f.grid);
  for (int c = 0; c < f.size(); ++c) out.values[c] = gamma_d1(f.values[c]);
  return out;
}

double YosidaPotential::collar_ratio(int n) const {
  double worst = 0.0;
  const double th = p_.theta;
  for (double centre : {k_.psi1, k_.psi2}) {
    for (int m = 0; m < n; ++m) {
      const double s = centre - th + 2.0 * th * m / (n - 1);
      const double g = gamma(s) - gamma_d1(s) * obstacle_excess(s, k_);
      worst = std::max(worst, std::abs(g));
    }
  }
  return worst * p_.alpha / th;
}

double mollified_yosida(double s, const ObstacleInterval& k, const YosidaParams& p) {
  return YosidaPotential(k, p).mollified_yosida(s);
}

double mollified_yosida_prime(double s, const ObstacleInterval& k, const YosidaParams& p) {
  return YosidaPotential(k, p).mollified_yosida_prime(s);
}

double psi0_alpha(double s, const ObstacleInterval& k, const YosidaParams& p) {
  return YosidaPotential(k, p).psi0_alpha(s);
}

PotentialFamily PotentialFamily::geometric(const ObstacleInterval& k, double alpha0, double factor,
                                           int n_stages, ThetaRule rule) {
  if (!(alpha0 > 0.0)) throw ConfigError("potential.alpha0 must be > 0");
  if (!(factor > 0.0 && factor < 1.0)) throw ConfigError("potential.alpha_factor must lie in (0, 1)");
  if (n_stages < 1) throw ConfigError("potential.n_stages must be >= 1");
  PotentialFamily fam{k, {}, rule};
  double a = alpha0;
  for (int n = 0; n < n_stages; ++n, a *= factor) fam.schedule.push_back(a);
  fam.validate();
  return fam;
}

void PotentialFamily::validate() const {
  interval.validate();
  if (schedule.empty()) throw ConfigError("potential: empty alpha schedule");
  for (std::size_t n = 0; n < schedule.size(); ++n) {
    if (!(schedule[n] > 0.0)) throw ConfigError("potential: schedule entries must be > 0");
    if (n > 0 && !(schedule[n] < schedule[n - 1]))
      throw ConfigError("potential: schedule must be strictly decreasing");
    member(n);
  }
}

YosidaPotential PotentialFamily::member(std::size_t n) const {
  const double a = schedule.at(n);
  return YosidaPotential(interval, YosidaParams{a, theta_rule(a)});
}

std::pair<double, double> obstacle_violation(const CellField& f, const ObstacleInterval& k) {
  double lo = 0.0, hi = 0.0;
  for (int c = 0; c < f.size(); ++c) {
    lo = std::max(lo, k.psi1 - f.values[c]);
    hi = std::max(hi, f.values[c] - k.psi2);
  }
  return {lo, hi};
}

}  // namespace chns
