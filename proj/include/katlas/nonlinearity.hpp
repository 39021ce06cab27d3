#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace katlas {

struct PowerTerm {
  double coeff;
  double p;

  friend bool operator==(const PowerTerm&, const PowerTerm&) = default;
};

/// f(t) = -omega t + sum_i c_i |t|^(p_i - 2) t, with omega > 0, c_i > 0, p_i > 2.
///
/// The class only holds validated data; subcriticality depends on the
/// dimension and is reported by check_berestycki_lions instead of being
/// enforced here.
class PowerNonlinearity {
 public:
  PowerNonlinearity(double omega, std::vector<PowerTerm> terms);

  double omega() const noexcept { return omega_; }
  std::span<const PowerTerm> terms() const noexcept { return terms_; }

  double f(double t) const noexcept;
  double F(double t) const noexcept;
  /// f'(t); needed by the shooting sensitivity equation.
  double df(double t) const noexcept;

  /// Closed-form zero of F for each term taken alone: (p omega / (2 c))^(1/(p-2)).
  double smallest_single_term_zeta() const noexcept;

  nlohmann::json to_json() const;
  static PowerNonlinearity from_json(const nlohmann::json& j);

  friend bool operator==(const PowerNonlinearity&, const PowerNonlinearity&) = default;

 private:
  double omega_;
  std::vector<PowerTerm> terms_;
};

double eval_f(const PowerNonlinearity& nl, double t);
double eval_F(const PowerNonlinearity& nl, double t);

/// Smallest zeta > 0 with F(zeta) = 0.
double zeta_of(const PowerNonlinearity& nl);

struct AssumptionReport {
  bool f1_ok = false;
  bool f2_ok = false;
  bool f3_ok = false;
  bool f4_ok = false;
  double zeta = 0.0;
  std::vector<std::string> messages;

  bool all_ok() const noexcept { return f1_ok && f2_ok && f3_ok && f4_ok; }
  nlohmann::json to_json() const;
};

/// Failures are reported in the flags and messages, never thrown.
AssumptionReport check_berestycki_lions(const PowerNonlinearity& nl, int N);

}  // namespace katlas
