#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace kslab {

/// Physical constants of the chemotaxis-growth system
///   u_t = div(d1 grad u - chi u grad v) + f(u),  v_t = d2 lap v - beta v + alpha u
/// together with the spatial dimension n the thresholds refer to.
struct Parameters {
  double d1 = 1.0;
  double d2 = 1.0;
  double chi = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  double kappa = 1.0;
  double mu = 1.0;
  double a = 0.0;
  int n = 3;

  friend bool operator==(const Parameters&, const Parameters&) = default;
};

/// Returns `p` unchanged if every positivity constraint holds, throws
/// InputError naming the offending field otherwise.
Parameters validate(const Parameters& p);

/// Pair (a, mu) with f(s) <= a - mu s^2 for s >= 0.
struct SourceCertificate {
  double a = 0.0;
  double mu = 1.0;
};

enum class SourceKind { StandardLogistic, Custom };

/// Reaction term f(u) of the cell equation.
///
/// The standard logistic source kappa*s - mu*s^2 carries an automatically
/// derived certificate. Custom sources must declare one, and it is checked
/// on the sample grid returned by certificate_samples() at construction.
class SourceFunction {
 public:
  static SourceFunction standard_logistic(double kappa, double mu);
  static SourceFunction custom(std::function<double(double)> fn,
                               SourceCertificate certificate);

  /// f(s); throws InputError for s < 0.
  double operator()(double s) const;

  /// Local Lipschitz estimate |f'(s)|.
  double lipschitz(double s) const;

  SourceKind kind() const noexcept { return kind_; }
  const SourceCertificate& certificate() const noexcept { return cert_; }
  double kappa() const noexcept { return kappa_; }
  double mu() const noexcept { return mu_; }

  /// True if f(0) >= 0 and f(s) <= cert.a - cert.mu s^2 on every sample.
  bool satisfies(const SourceCertificate& cert) const;

 private:
  SourceFunction() = default;
  double eval_unchecked(double s) const;

  SourceKind kind_ = SourceKind::StandardLogistic;
  double kappa_ = 0.0;
  double mu_ = 1.0;
  std::function<double(double)> fn_;
  SourceCertificate cert_;
};

/// {0} followed by 30 geometrically spaced points from 1e-3 to 1e6.
std::span<const double> certificate_samples();

/// Default certificate of kappa*s - mu*s^2: (kappa^2/(2 mu), mu/2) when
/// kappa > 0, (0, mu) otherwise.
SourceCertificate logistic_certificate(double kappa, double mu);

/// Uniform cell-centred box grid. Index order is C order: the last axis
/// varies fastest.
class Grid {
 public:
  Grid(int dim, std::array<double, 3> extents, std::array<int, 3> cells);

  /// Convenience: unit box [0,1]^dim with `cells_per_axis` cells each way.
  static Grid unit_box(int dim, int cells_per_axis);

  int dim() const noexcept { return dim_; }
  double extent(int axis) const { return extents_.at(axis); }
  int cells(int axis) const { return cells_.at(axis); }
  double spacing(int axis) const { return extents_.at(axis) / cells_.at(axis); }
  const std::array<double, 3>& extents() const noexcept { return extents_; }
  const std::array<int, 3>& cell_counts() const noexcept { return cells_; }

  std::size_t size() const noexcept { return size_; }
  double cell_volume() const noexcept { return cell_volume_; }
  double measure() const noexcept;
  double min_spacing() const noexcept;

  /// Distance in the flat index between neighbours along `axis`.
  std::size_t stride(int axis) const { return strides_.at(axis); }

  std::array<int, 3> unflatten(std::size_t index) const;
  std::array<double, 3> center(std::size_t index) const;

  friend bool operator==(const Grid& l, const Grid& r) {
    return l.dim_ == r.dim_ && l.extents_ == r.extents_ && l.cells_ == r.cells_;
  }

 private:
  int dim_;
  std::array<double, 3> extents_;
  std::array<int, 3> cells_;
  std::array<std::size_t, 3> strides_{};
  std::size_t size_ = 0;
  double cell_volume_ = 0.0;
};

/// Cell density u and signal v on a grid at time t.
struct State {
  std::vector<double> u;
  std::vector<double> v;
  double t = 0.0;
};

/// Throws InputError if field sizes mismatch the grid or any entry is
/// negative or non-finite.
void check_state(const State& s, const Grid& grid);

}  // namespace kslab
