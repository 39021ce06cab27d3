#include "katlas/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "katlas/error.hpp"

namespace katlas {

PowerNonlinearity::PowerNonlinearity(double omega, std::vector<PowerTerm> terms)
    : omega_(omega), terms_(std::move(terms)) {
  if (!(std::isfinite(omega_) && omega_ > 0.0)) {
    throw Error(ErrorKind::Precondition, "omega must be a positive finite number");
  }
  if (terms_.empty()) {
    throw Error(ErrorKind::Precondition, "at least one power term is required");
  }
  for (const auto& term : terms_) {
    if (!(std::isfinite(term.coeff) && term.coeff > 0.0)) {
      throw Error(ErrorKind::Precondition, "term coefficients must be positive");
    }
    if (!(std::isfinite(term.p) && term.p > 2.0)) {
      throw Error(ErrorKind::Precondition, "term exponents must exceed 2");
    }
  }
}

double PowerNonlinearity::f(double t) const noexcept {
  const double at = std::fabs(t);
  double value = -omega_ * t;
  for (const auto& term : terms_) {
    value += term.coeff * std::pow(at, term.p - 2.0) * t;
  }
  return value;
}

double PowerNonlinearity::F(double t) const noexcept {
  const double at = std::fabs(t);
  double value = -0.5 * omega_ * t * t;
  for (const auto& term : terms_) {
    value += term.coeff * std::pow(at, term.p) / term.p;
  }
  return value;
}

double PowerNonlinearity::df(double t) const noexcept {
  const double at = std::fabs(t);
  double value = -omega_;
  for (const auto& term : terms_) {
    value += term.coeff * (term.p - 1.0) * std::pow(at, term.p - 2.0);
  }
  return value;
}

double PowerNonlinearity::smallest_single_term_zeta() const noexcept {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& term : terms_) {
    best = std::min(best, std::pow(term.p * omega_ / (2.0 * term.coeff), 1.0 / (term.p - 2.0)));
  }
  return best;
}

nlohmann::json PowerNonlinearity::to_json() const {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& term : terms_) {
    terms.push_back({{"coeff", term.coeff}, {"p", term.p}});
  }
  return {{"omega", omega_}, {"terms", terms}};
}

PowerNonlinearity PowerNonlinearity::from_json(const nlohmann::json& j) {
  try {
    std::vector<PowerTerm> terms;
    for (const auto& t : j.at("terms")) {
      terms.push_back({t.at("coeff").get<double>(), t.at("p").get<double>()});
    }
    return PowerNonlinearity(j.at("omega").get<double>(), std::move(terms));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("nonlinearity: ") + e.what());
  }
}

double eval_f(const PowerNonlinearity& nl, double t) { return nl.f(t); }

double eval_F(const PowerNonlinearity& nl, double t) { return nl.F(t); }

double zeta_of(const PowerNonlinearity& nl) {
  const double single = nl.smallest_single_term_zeta();
  if (nl.terms().size() == 1) {
    return single;
  }
  // F(t)/t^2 is increasing in t, so one sign change exists and the scan
  // only has to find the first grid point with F >= 0.
  auto reduced = [&](double t) { return nl.F(t) / (t * t); };
  double lo = single * 1e-3;
  if (reduced(lo) >= 0.0) {
    throw Error(ErrorKind::NoPositiveZero, "F is nonnegative at the bottom of the scan");
  }
  double hi = lo;
  const double limit = single * 1e3;
  while (reduced(hi) < 0.0) {
    lo = hi;
    hi *= 1.5;
    if (hi > limit) {
      throw Error(ErrorKind::NoPositiveZero, "F stays negative on the searched range");
    }
  }
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    (reduced(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

nlohmann::json AssumptionReport::to_json() const {
  return {{"f1_ok", f1_ok}, {"f2_ok", f2_ok}, {"f3_ok", f3_ok},
          {"f4_ok", f4_ok}, {"zeta", zeta},   {"messages", messages}};
}

AssumptionReport check_berestycki_lions(const PowerNonlinearity& nl, int N) {
  AssumptionReport report;
  if (N < 1) {
    report.messages.push_back("dimension must be at least 1");
    return report;
  }

  // Odd polynomial in |t| with continuous terms.
  report.f1_ok = true;

  // lim f(t)/t = -omega exactly, since every p > 2.
  report.f2_ok = nl.omega() > 0.0;
  if (!report.f2_ok) {
    report.messages.push_back("f2: omega must be positive");
  }

  report.f3_ok = true;
  if (N >= 3) {
    const double critical = 2.0 * N / (N - 2.0);
    for (const auto& term : nl.terms()) {
      if (!(term.p < critical)) {
        report.f3_ok = false;
        std::ostringstream msg;
        msg << "f3: exponent " << term.p << " is not below the critical exponent " << critical
            << " for N=" << N;
        report.messages.push_back(msg.str());
      }
    }
  }

  try {
    report.zeta = zeta_of(nl);
  } catch (const Error& e) {
    report.messages.push_back(std::string("f4: ") + e.what());
    return report;
  }

  const double zeta = report.zeta;
  bool negative_below = true;
  for (int i = 1; i < 64; ++i) {
    if (!(nl.F(zeta * i / 64.0) < 0.0)) {
      negative_below = false;
    }
  }
  const bool zero_at = std::fabs(nl.F(zeta)) <= 1e-10 * (0.5 * nl.omega() * zeta * zeta);
  const bool slope_at = nl.f(zeta) > 0.0;
  if (N == 1) {
    report.f4_ok = negative_below && zero_at && slope_at;
    if (!report.f4_ok) {
      report.messages.push_back("f4: sign structure of F around zeta fails for N=1");
    }
  } else {
    // Any point beyond zeta has F > 0.
    report.f4_ok = nl.F(2.0 * zeta) > 0.0;
    if (!report.f4_ok) {
      report.messages.push_back("f4: no point with F > 0 found");
    }
  }
  return report;
}

}  // namespace katlas
