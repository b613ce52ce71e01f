#include "chns/physics.hpp"

#include <cmath>
#include <string>

#include "chns/errors.hpp"

namespace chns {

double Coefficient::value(double s) const { return c0 + c1 * std::tanh(s); }

double Coefficient::d1(double s) const {
  const double t = std::tanh(s);
  return c1 * (1.0 - t * t);
}

double Coefficient::d2(double s) const {
  const double t = std::tanh(s);
  return -2.0 * c1 * t * (1.0 - t * t);
}

CellField Coefficient::value(const CellField& f) const {
  CellField out(f.grid);
  for (int c = 0; c < f.size(); ++c) out.values[c] = value(f.values[c]);
  return out;
}

CellField Coefficient::d1(const CellField& f) const {
  CellField out(f.grid);
  for (int c = 0; c < f.size(); ++c) out.values[c] = d1(f.values[c]);
  return out;
}

namespace {

// tanh saturates, so sampling a generous interval covers the whole real line.
void check_bounds(const Coefficient& k, const char* name, double b1, double b2) {
  for (int n = 0; n <= 4000; ++n) {
    const double s = -20.0 + 40.0 * n / 4000.0;
    const double v = k.value(s);
    if (!(v >= b1) || !(std::abs(v) <= b2) || !(std::abs(k.d1(s)) <= b2) ||
        !(std::abs(k.d2(s)) <= b2))
      throw ConfigError(std::string("physics.") + name + ": coefficient bounds b1/b2 violated");
  }
}

}  // namespace

void PhysConfig::validate() const {
  grid.validate();
  if (!(rho1 > 0.0)) throw ConfigError("physics.rho1 must be > 0");
  if (!(rho1 <= rho2)) throw ConfigError("physics.rho1 must be <= physics.rho2");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("time.tau must be > 0");
  if (M < 2) throw ConfigError("time.M must be >= 2");
  if (!(mean_shift > -1.0 && mean_shift < 1.0))
    throw ConfigError("physics.mean_shift must lie in (-1, 1)");
  if (!(b1 > 0.0 && b1 <= b2)) throw ConfigError("physics.b1/b2: need 0 < b1 <= b2");
  check_bounds(mobility, "mobility", b1, b2);
  check_bounds(viscosity, "viscosity", b1, b2);
}

double density(double phi, const PhysConfig& cfg) {
  const double r = 0.5 * (cfg.rho1 + cfg.rho2) + cfg.beta() * (phi + cfg.mean_shift);
  return r > 0.0 ? r : 0.0;
}

double density_d1(double phi, const PhysConfig& cfg) {
  const double r = 0.5 * (cfg.rho1 + cfg.rho2) + cfg.beta() * (phi + cfg.mean_shift);
  return r > 0.0 ? cfg.beta() : 0.0;
}

CellField density(const CellField& phi, const PhysConfig& cfg, int* clamp_count) {
  CellField out(phi.grid);
  int clamps = 0;
  for (int c = 0; c < phi.size(); ++c) {
    const double r = 0.5 * (cfg.rho1 + cfg.rho2) + cfg.beta() * (phi.values[c] + cfg.mean_shift);
    if (r <= 0.0) ++clamps;
    out.values[c] = r > 0.0 ? r : 0.0;
  }
  if (clamp_count) *clamp_count = clamps;
  return out;
}

CellField density_d1(const CellField& phi, const PhysConfig& cfg) {
  CellField out(phi.grid);
  for (int c = 0; c < phi.size(); ++c) out.values[c] = density_d1(phi.values[c], cfg);
  return out;
}

ControlSeries::ControlSeries(const GridSpec& g, int M) : grid(g), u(M - 1, FaceField(g)) {}

FaceField& ControlSeries::at(int k) {
  if (k < 1 || k > count()) throw std::out_of_range("control index " + std::to_string(k));
  return u[k - 1];
}

const FaceField& ControlSeries::at(int k) const {
  if (k < 1 || k > count()) throw std::out_of_range("control index " + std::to_string(k));
  return u[k - 1];
}

Eigen::VectorXd ControlSeries::flat() const {
  const int nf = grid.faces();
  Eigen::VectorXd x(nf * count());
  for (int k = 0; k < count(); ++k) x.segment(k * nf, nf) = u[k].values;
  return x;
}

ControlSeries ControlSeries::from_flat(const GridSpec& g, int M, const Eigen::VectorXd& x) {
  ControlSeries s(g, M);
  const int nf = g.faces();
  if (x.size() != static_cast<Eigen::Index>(nf) * (M - 1))
    throw ConfigError("control vector has wrong length");
  for (int k = 0; k < M - 1; ++k) s.u[k].values = x.segment(k * nf, nf);
  return s;
}

double inner(const ControlSeries& a, const ControlSeries& b) {
  double s = 0.0;
  for (int k = 1; k <= a.count(); ++k) s += inner_fc(a.at(k), b.at(k));
  return s;
}

Trajectory::Trajectory(const GridSpec& g, int M_)
    : grid(g),
      M(M_),
      phi_(M_ + 1, CellField(g)),
      mu_(M_, CellField(g)),
      vel_(M_, FaceField(g)),
      pres_(M_, CellField(g)) {}

namespace {

void check_index(int i, int lo, int hi, const char* what) {
  if (i < lo || i > hi)
    throw std::out_of_range(std::string(what) + " index " + std::to_string(i) + " outside [" +
                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

}  // namespace

CellField& Trajectory::phi(int i) {
  check_index(i, -1, M - 1, "phi");
  return phi_[i + 1];
}
const CellField& Trajectory::phi(int i) const {
  check_index(i, -1, M - 1, "phi");
  return phi_[i + 1];
}
CellField& Trajectory::mu(int i) {
  check_index(i, 0, M - 1, "mu");
  return mu_[i];
}
const CellField& Trajectory::mu(int i) const {
  check_index(i, 0, M - 1, "mu");
  return mu_[i];
}
FaceField& Trajectory::vel(int i) {
  check_index(i, 0, M - 1, "vel");
  return vel_[i];
}
const FaceField& Trajectory::vel(int i) const {
  check_index(i, 0, M - 1, "vel");
  return vel_[i];
}
CellField& Trajectory::pres(int i) {
  check_index(i, 1, M - 1, "pres");
  return pres_[i];
}
const CellField& Trajectory::pres(int i) const {
  check_index(i, 1, M - 1, "pres");
  return pres_[i];
}

}  // namespace chns
