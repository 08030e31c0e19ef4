#pragma once

// Equilibrium density fluctuation field, its Dynkin martingale and the
// predicted quadratic variation. The centring density is the constant rho.

#include <span>
#include <string>
#include <vector>

#include "slowsep/lattice.hpp"
#include "slowsep/simulator.hpp"
#include "slowsep/test_function.hpp"

namespace slowsep::fluct {

/// Weights w with Y = sum_x w[x-1] (eta(x) - rho): w[x-1] = f(x/n) / sqrt(n).
std::vector<double> field_weights(const pde::TestFunction& f, int n);

/// Weights of the martingale integrand Gamma (bulk Laplacian term plus the
/// gradient and reservoir corrections at sites 1 and n-1).
std::vector<double> gamma_weights(const pde::TestFunction& f, const Parameters& p);

/// sum_x w[x-1] (eta(x) - rho).
double centered_sum(const Configuration& eta, std::span<const double> weights, double rho);

/// Y^n(f) = n^{-1/2} sum_x f(x/n) (eta(x) - rho).
double fluctuation_field(const Configuration& eta, const pde::TestFunction& f, const Parameters& p,
                         double rho);

/// Gamma^n(f)(eta), the integrand of the Dynkin martingale: n^2 L applied to Y^n(f).
double gamma_term(const Configuration& eta, const pde::TestFunction& f, const Parameters& p,
                  double rho);

/// 2 chi t [ n^{-1} sum_{x=1}^{n-2} (grad+ f(x/n))^2 + n^{1-theta} (f(1/n)^2 + f((n-1)/n)^2) ].
double predicted_qv(const pde::TestFunction& f, const Parameters& p, double t, double rho);

/// Linear functional sum_x w[x-1] (eta(x) - rho) updated in O(1) per event.
class LinearFunctional {
 public:
  LinearFunctional(std::vector<double> weights, double rho);

  void reset(const Configuration& eta);
  /// `after` is the configuration right after event e.
  void update(BondEvent e, const Configuration& after);
  double value() const noexcept { return value_; }
  std::span<const double> weights() const noexcept { return weights_; }

 private:
  std::vector<double> weights_;
  double rho_;
  double value_ = 0.0;
};

struct FluctuationSeries {
  pde::TestFunction f;
  Parameters params;
  double rho = 0.5;
  std::vector<double> times;
  /// values[r][k] = Y_{times[k]}(f) for replica r.
  std::vector<std::vector<double>> values;

  std::size_t replicas() const noexcept { return values.size(); }
  std::size_t time_index(double t) const;
  std::vector<double> column(std::size_t k) const;
};

/// Field values from the grid snapshots of each record.
FluctuationSeries fluctuation_series(std::span<const kmc::TrajectoryRecord> records,
                                     const pde::TestFunction& f, double rho);

/// Records Y_t(f) at every grid time.
class FieldObserver final : public kmc::Observer {
 public:
  FieldObserver(std::string name, const pde::TestFunction& f, double rho);

  std::string name() const override { return name_; }
  void start(const Parameters& p, const Configuration& initial) override;
  void on_event(double t, BondEvent e, const Configuration& after) override;
  void on_grid(std::size_t k, double t, const Configuration& eta) override;
  std::vector<double> series() const override { return values_; }

 private:
  std::string name_;
  pde::TestFunction f_;
  double rho_;
  LinearFunctional field_{{}, 0.5};
  std::vector<double> values_;
};

/// Tracks M_t = Y_t - Y_0 - int_0^t Gamma_s ds exactly: Gamma is piecewise
/// constant between events, so the integral is a finite sum.
class MartingaleObserver final : public kmc::Observer {
 public:
  MartingaleObserver(std::string name, const pde::TestFunction& f, double rho);

  std::string name() const override { return name_; }
  void start(const Parameters& p, const Configuration& initial) override;
  void on_event(double t, BondEvent e, const Configuration& after) override;
  void on_grid(std::size_t k, double t, const Configuration& eta) override;
  /// M at each grid time followed by Y at each grid time.
  std::vector<double> series() const override;

  const std::vector<double>& martingale() const noexcept { return martingale_; }
  const std::vector<double>& integral() const noexcept { return integral_values_; }
  const std::vector<double>& field() const noexcept { return field_values_; }

 private:
  void advance(double t);

  std::string name_;
  pde::TestFunction f_;
  double rho_;
  LinearFunctional field_{{}, 0.5};
  LinearFunctional gamma_{{}, 0.5};
  double y0_ = 0.0;
  double last_t_ = 0.0;
  double integral_ = 0.0;
  std::vector<double> martingale_;
  std::vector<double> integral_values_;
  std::vector<double> field_values_;
};

struct MartingaleSeries {
  pde::TestFunction f;
  std::vector<double> times;
  /// martingale[r][k], gamma_integral[r][k] for replica r at times[k].
  std::vector<std::vector<double>> martingale;
  std::vector<std::vector<double>> gamma_integral;
};

/// Martingale of one logged trajectory, by replaying its events. Throws
/// std::invalid_argument when the record has no event log or p differs from
/// the record's parameters.
MartingaleSeries dynkin_martingale(const kmc::TrajectoryRecord& record, const pde::TestFunction& f,
                                   const Parameters& p, double rho);

/// Exact int_0^t (eta_s(x) - rho) ds at every grid time, as a trajectory observer.
class OccupationIntegralObserver final : public kmc::Observer {
 public:
  OccupationIntegralObserver(std::string name, int site, double rho);

  std::string name() const override { return name_; }
  void start(const Parameters& p, const Configuration& initial) override;
  void on_event(double t, BondEvent e, const Configuration& after) override;
  void on_grid(std::size_t k, double t, const Configuration& eta) override;
  std::vector<double> series() const override { return values_; }

 private:
  std::string name_;
  std::size_t site_;
  double rho_;
  bool occupied_ = false;
  double last_t_ = 0.0;
  double integral_ = 0.0;
  std::vector<double> values_;
};

/// int_0^t (eta_s(x) - rho) ds from an event-logged record; t in [0, horizon].
double occupation_integral(const kmc::TrajectoryRecord& record, int site, double rho, double t);

}  // namespace slowsep::fluct
