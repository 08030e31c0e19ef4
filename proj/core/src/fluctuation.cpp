#include "slowsep/fluctuation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace slowsep::fluct {

std::vector<double> field_weights(const pde::TestFunction& f, int n) {
  if (n < 2) throw std::invalid_argument("field_weights: n must be >= 2");
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<double> w(static_cast<std::size_t>(n - 1));
  for (int x = 1; x < n; ++x) w[static_cast<std::size_t>(x - 1)] = scale * f.value(static_cast<double>(x) / n);
  return w;
}

std::vector<double> gamma_weights(const pde::TestFunction& f, const Parameters& p) {
  const int n = p.n();
  const double dn = n;
  std::vector<double> fx(static_cast<std::size_t>(n) + 1);
  for (int x = 0; x <= n; ++x) fx[static_cast<std::size_t>(x)] = f.value(x / dn);
  auto F = [&](int x) { return fx[static_cast<std::size_t>(x)]; };

  const double root_n = std::sqrt(dn);
  std::vector<double> w(static_cast<std::size_t>(n - 1));
  for (int x = 1; x < n; ++x) {
    const double laplacian = dn * dn * (F(x + 1) + F(x - 1) - 2.0 * F(x));
    w[static_cast<std::size_t>(x - 1)] = laplacian / root_n;
  }
  const double reservoir = std::pow(dn, 1.5 - p.theta());
  w.front() += root_n * dn * (F(1) - F(0)) - reservoir * F(1);
  w.back() += -root_n * dn * (F(n) - F(n - 1)) - reservoir * F(n - 1);
  return w;
}

double centered_sum(const Configuration& eta, std::span<const double> weights, double rho) {
  if (weights.size() != eta.sites()) throw std::invalid_argument("weights do not match the lattice");
  double s = 0.0;
  for (std::size_t x = 1; x <= weights.size(); ++x) s += weights[x - 1] * (eta.at(x) - rho);
  return s;
}

double fluctuation_field(const Configuration& eta, const pde::TestFunction& f, const Parameters& p,
                         double rho) {
  return centered_sum(eta, field_weights(f, p.n()), rho);
}

double gamma_term(const Configuration& eta, const pde::TestFunction& f, const Parameters& p,
                  double rho) {
  return centered_sum(eta, gamma_weights(f, p), rho);
}

double predicted_qv(const pde::TestFunction& f, const Parameters& p, double t, double rho) {
  const int n = p.n();
  const double dn = n;
  double bulk = 0.0;
  for (int x = 1; x <= n - 2; ++x) {
    const double g = dn * (f.value((x + 1) / dn) - f.value(x / dn));
    bulk += g * g;
  }
  bulk /= dn;
  const double f1 = f.value(1.0 / dn);
  const double fm = f.value((n - 1) / dn);
  const double boundary = std::pow(dn, 1.0 - p.theta()) * (f1 * f1 + fm * fm);
  return 2.0 * rho * (1.0 - rho) * t * (bulk + boundary);
}

LinearFunctional::LinearFunctional(std::vector<double> weights, double rho)
    : weights_(std::move(weights)), rho_(rho) {}

void LinearFunctional::reset(const Configuration& eta) { value_ = centered_sum(eta, weights_, rho_); }

void LinearFunctional::update(BondEvent e, const Configuration& after) {
  const auto last = weights_.size();
  if (e.bond == 0) {
    value_ += weights_[0] * (after.occupied(1) ? 1.0 : -1.0);
  } else if (static_cast<std::size_t>(e.bond) == last) {
    value_ += weights_[last - 1] * (after.occupied(last) ? 1.0 : -1.0);
  } else {
    const auto x = static_cast<std::size_t>(e.bond);
    const int d = after.at(x) - after.at(x + 1);
    value_ += (weights_[x - 1] - weights_[x]) * d;
  }
}

std::size_t FluctuationSeries::time_index(double t) const {
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (std::abs(times[k] - t) <= 1e-12 * std::max(1.0, t)) return k;
  }
  throw std::invalid_argument("time " + std::to_string(t) + " is not on the series grid");
}

std::vector<double> FluctuationSeries::column(std::size_t k) const {
  std::vector<double> c;
  c.reserve(values.size());
  for (const auto& row : values) c.push_back(row.at(k));
  return c;
}

FluctuationSeries fluctuation_series(std::span<const kmc::TrajectoryRecord> records,
                                     const pde::TestFunction& f, double rho) {
  if (records.empty()) throw std::invalid_argument("fluctuation_series: empty record set");
  FluctuationSeries out{f, records.front().params, rho, records.front().grid, {}};
  const auto w = field_weights(f, out.params.n());
  for (const auto& rec : records) {
    if (!(rec.params == out.params) || rec.grid != out.times) {
      throw std::invalid_argument("records do not share parameters and grid");
    }
    if (rec.snapshots.size() != rec.grid.size()) throw std::invalid_argument("record lacks snapshots");
    std::vector<double> row;
    row.reserve(rec.snapshots.size());
    for (const auto& eta : rec.snapshots) row.push_back(centered_sum(eta, w, rho));
    out.values.push_back(std::move(row));
  }
  return out;
}

FieldObserver::FieldObserver(std::string name, const pde::TestFunction& f, double rho)
    : name_(std::move(name)), f_(f), rho_(rho) {}

void FieldObserver::start(const Parameters& p, const Configuration& initial) {
  field_ = LinearFunctional(field_weights(f_, p.n()), rho_);
  field_.reset(initial);
  values_.clear();
}

void FieldObserver::on_event(double, BondEvent e, const Configuration& after) { field_.update(e, after); }

void FieldObserver::on_grid(std::size_t, double, const Configuration&) { values_.push_back(field_.value()); }

MartingaleObserver::MartingaleObserver(std::string name, const pde::TestFunction& f, double rho)
    : name_(std::move(name)), f_(f), rho_(rho) {}

void MartingaleObserver::start(const Parameters& p, const Configuration& initial) {
  field_ = LinearFunctional(field_weights(f_, p.n()), rho_);
  gamma_ = LinearFunctional(gamma_weights(f_, p), rho_);
  field_.reset(initial);
  gamma_.reset(initial);
  y0_ = field_.value();
  last_t_ = 0.0;
  integral_ = 0.0;
  martingale_.clear();
  integral_values_.clear();
  field_values_.clear();
}

void MartingaleObserver::advance(double t) {
  integral_ += gamma_.value() * (t - last_t_);
  last_t_ = t;
}

void MartingaleObserver::on_event(double t, BondEvent e, const Configuration& after) {
  advance(t);
  field_.update(e, after);
  gamma_.update(e, after);
}

void MartingaleObserver::on_grid(std::size_t, double t, const Configuration&) {
  advance(t);
  field_values_.push_back(field_.value());
  integral_values_.push_back(integral_);
  martingale_.push_back(field_.value() - y0_ - integral_);
}

std::vector<double> MartingaleObserver::series() const {
  std::vector<double> out = martingale_;
  out.insert(out.end(), field_values_.begin(), field_values_.end());
  return out;
}

MartingaleSeries dynkin_martingale(const kmc::TrajectoryRecord& record, const pde::TestFunction& f,
                                   const Parameters& p, double rho) {
  if (!record.events) throw std::invalid_argument("dynkin_martingale needs an event-logged record");
  if (!(record.params == p)) throw std::invalid_argument("parameters differ from the record's");
  MartingaleObserver obs("martingale", f, rho);
  kmc::Observer* list[] = {&obs};
  kmc::replay(record, list);
  MartingaleSeries out{f, record.grid, {obs.martingale()}, {obs.integral()}};
  return out;
}

OccupationIntegralObserver::OccupationIntegralObserver(std::string name, int site, double rho)
    : name_(std::move(name)), site_(static_cast<std::size_t>(site)), rho_(rho) {
  if (site < 1) throw std::invalid_argument("site must be >= 1");
}

void OccupationIntegralObserver::start(const Parameters& p, const Configuration& initial) {
  if (site_ > static_cast<std::size_t>(p.sites())) throw std::invalid_argument("site outside the lattice");
  occupied_ = initial.occupied(site_);
  last_t_ = 0.0;
  integral_ = 0.0;
  values_.clear();
}

void OccupationIntegralObserver::on_event(double t, BondEvent, const Configuration& after) {
  const bool now = after.occupied(site_);
  if (now == occupied_) return;
  integral_ += ((occupied_ ? 1.0 : 0.0) - rho_) * (t - last_t_);
  last_t_ = t;
  occupied_ = now;
}

void OccupationIntegralObserver::on_grid(std::size_t, double t, const Configuration&) {
  values_.push_back(integral_ + ((occupied_ ? 1.0 : 0.0) - rho_) * (t - last_t_));
}

double occupation_integral(const kmc::TrajectoryRecord& record, int site, double rho, double t) {
  if (!record.events) throw std::invalid_argument("occupation_integral needs an event-logged record");
  if (site < 1 || site > record.params.sites()) throw std::invalid_argument("site outside the lattice");
  if (!(t >= 0.0) || t > record.horizon) throw std::invalid_argument("t outside [0, horizon]");
  const auto x = static_cast<std::size_t>(site);
  Configuration eta = record.initial;
  double integral = 0.0;
  double last = 0.0;
  const auto& log = *record.events;
  for (std::size_t i = 0; i < log.size() && log.times[i] <= t; ++i) {
    const bool before = eta.occupied(x);
    apply_event_in_place(eta, BondEvent{static_cast<int>(log.bonds[i])});
    if (eta.occupied(x) != before) {
      integral += ((before ? 1.0 : 0.0) - rho) * (log.times[i] - last);
      last = log.times[i];
    }
  }
  return integral + (eta.at(x) - rho) * (t - last);
}

}  // namespace slowsep::fluct
