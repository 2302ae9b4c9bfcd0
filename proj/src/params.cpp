#include "kslab/params.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "kslab/error.hpp"

namespace kslab {

Parameters validate(const Parameters& p) {
  auto require_positive = [](double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw InputError(std::string(name) + " must be positive");
    }
  };
  require_positive(p.d1, "d1");
  require_positive(p.d2, "d2");
  require_positive(p.alpha, "alpha");
  require_positive(p.beta, "beta");
  require_positive(p.mu, "mu");
  if (!(p.a >= 0.0) || !std::isfinite(p.a)) throw InputError("a must be nonnegative");
  if (!std::isfinite(p.chi)) throw InputError("chi must be finite");
  if (!std::isfinite(p.kappa)) throw InputError("kappa must be finite");
  if (p.n < 1) throw InputError("n must be at least 1");
  return p;
}

std::span<const double> certificate_samples() {
  static const std::array<double, 31> samples = [] {
    std::array<double, 31> s{};
    s[0] = 0.0;
    for (int i = 0; i < 30; ++i) s[i + 1] = std::pow(10.0, -3.0 + 9.0 * i / 29.0);
    return s;
  }();
  return samples;
}

SourceCertificate logistic_certificate(double kappa, double mu) {
  if (kappa > 0.0) return {kappa * kappa / (2.0 * mu), 0.5 * mu};
  return {0.0, mu};
}

SourceFunction SourceFunction::standard_logistic(double kappa, double mu) {
  if (!(mu > 0.0)) throw InputError("mu must be positive");
  SourceFunction f;
  f.kind_ = SourceKind::StandardLogistic;
  f.kappa_ = kappa;
  f.mu_ = mu;
  f.cert_ = logistic_certificate(kappa, mu);
  return f;
}

SourceFunction SourceFunction::custom(std::function<double(double)> fn,
                                      SourceCertificate certificate) {
  if (!fn) throw InputError("custom source needs a callable");
  if (!(certificate.mu > 0.0)) throw InputError("certificate mu must be positive");
  if (!(certificate.a >= 0.0)) throw InputError("certificate a must be nonnegative");
  SourceFunction f;
  f.kind_ = SourceKind::Custom;
  f.fn_ = std::move(fn);
  f.cert_ = certificate;
  f.mu_ = certificate.mu;
  if (!f.satisfies(certificate)) {
    throw InputError("custom source violates its declared (a, mu) certificate");
  }
  return f;
}

double SourceFunction::eval_unchecked(double s) const {
  if (kind_ == SourceKind::StandardLogistic) return kappa_ * s - mu_ * s * s;
  return fn_(s);
}

double SourceFunction::operator()(double s) const {
  if (!(s >= 0.0)) throw InputError("source evaluated at negative density");
  return eval_unchecked(s);
}

double SourceFunction::lipschitz(double s) const {
  if (kind_ == SourceKind::StandardLogistic) return std::abs(kappa_ - 2.0 * mu_ * s);
  const double h = 1e-6 * std::max(1.0, std::abs(s));
  const double lo = std::max(0.0, s - h);
  return std::abs(eval_unchecked(s + h) - eval_unchecked(lo)) / (s + h - lo);
}

bool SourceFunction::satisfies(const SourceCertificate& cert) const {
  if (eval_unchecked(0.0) < 0.0) return false;
  for (double s : certificate_samples()) {
    const double bound = cert.a - cert.mu * s * s;
    // relative slack for the cancellation in kappa*s - mu*s^2 at large s
    const double slack = 1e-12 * (std::abs(bound) + cert.a + 1.0);
    if (eval_unchecked(s) > bound + slack) return false;
  }
  return true;
}

Grid::Grid(int dim, std::array<double, 3> extents, std::array<int, 3> cells) : dim_(dim) {
  if (dim < 1 || dim > 3) throw InputError("grid dim must be 1, 2 or 3");
  for (int i = 0; i < 3; ++i) {
    if (i < dim) {
      if (!(extents[i] > 0.0) || !std::isfinite(extents[i]))
        throw InputError("grid extents must be positive");
      if (cells[i] < 4) throw InputError("grid needs at least 4 cells per axis");
      extents_[i] = extents[i];
      cells_[i] = cells[i];
    } else {
      extents_[i] = 1.0;
      cells_[i] = 1;
    }
  }
  strides_[2] = 1;
  strides_[1] = static_cast<std::size_t>(cells_[2]);
  strides_[0] = strides_[1] * static_cast<std::size_t>(cells_[1]);
  size_ = strides_[0] * static_cast<std::size_t>(cells_[0]);
  cell_volume_ = 1.0;
  for (int i = 0; i < dim_; ++i) cell_volume_ *= spacing(i);
}

Grid Grid::unit_box(int dim, int cells_per_axis) {
  return Grid(dim, {1.0, 1.0, 1.0}, {cells_per_axis, cells_per_axis, cells_per_axis});
}

double Grid::measure() const noexcept {
  double m = 1.0;
  for (int i = 0; i < dim_; ++i) m *= extents_[i];
  return m;
}

double Grid::min_spacing() const noexcept {
  double h = spacing(0);
  for (int i = 1; i < dim_; ++i) h = std::min(h, spacing(i));
  return h;
}

std::array<int, 3> Grid::unflatten(std::size_t index) const {
  std::array<int, 3> ijk{};
  for (int i = 0; i < 3; ++i) {
    ijk[i] = static_cast<int>(index / strides_[i]);
    index %= strides_[i];
  }
  return ijk;
}

std::array<double, 3> Grid::center(std::size_t index) const {
  const auto ijk = unflatten(index);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int i = 0; i < dim_; ++i) x[i] = (ijk[i] + 0.5) * spacing(i);
  return x;
}

void check_state(const State& s, const Grid& grid) {
  if (s.u.size() != grid.size() || s.v.size() != grid.size()) {
    throw InputError("state field size does not match grid");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(s.u[i] >= 0.0) || !std::isfinite(s.u[i])) throw InputError("u must be nonnegative");
    if (!(s.v[i] >= 0.0) || !std::isfinite(s.v[i])) throw InputError("v must be nonnegative");
  }
}

}  // namespace kslab
