#include "katlas/rescale.hpp"

#include <cmath>
#include <algorithm>

#include "katlas/error.hpp"

namespace katlas {

namespace {

constexpr double kTangentRelTol = 1e-12;
constexpr double kContinuumRelTol = 1e-10;

void require_positive(double x, const char* what) {
  if (!(std::isfinite(x) && x > 0.0)) {
    throw Error(ErrorKind::Precondition, std::string(what) + " must be positive and finite");
  }
}

double s_star_formula(double a, int N) {
  const double base = (N - 4.0) / ((N - 2.0) * a);
  return 2.0 / (N - 2.0) * std::pow(base, 0.5 * (N - 4.0));
}

double t_star_formula(double a, int N) { return std::sqrt((N - 4.0) / ((N - 2.0) * a)); }

double t_dstar_formula(double a, int N) { return std::sqrt((N - 4.0) / (N * a)); }

// Bisection for a root of h(t) = s on [lo, hi] where h is monotone;
// `increasing` gives the direction. Runs until the bracket is two adjacent doubles.
double bisect_h(double s, double a, int N, double lo, double hi, bool increasing) {
  for (int iter = 0; iter < 2200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;
    }
    const bool below = h_eval(mid, a, N) < s;
    if (below == increasing) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Largest real root of w^3 - a w - s = 0 for s > 0, a > 0; it exceeds sqrt(a).
double depressed_cubic_root(double a, double s) {
  const double disc = 4.0 * a * a * a - 27.0 * s * s;
  double w;
  if (disc > 0.0) {
    const double arg = std::clamp(1.5 * s / a * std::sqrt(3.0 / a), -1.0, 1.0);
    w = 2.0 * std::sqrt(a / 3.0) * std::cos(std::acos(arg) / 3.0);
  } else {
    const double u = std::cbrt(0.5 * s + std::sqrt(0.25 * s * s - a * a * a / 27.0));
    w = u + a / (3.0 * u);
  }
  for (int i = 0; i < 3; ++i) {
    const double slope = 3.0 * w * w - a;
    if (slope <= 0.0) {
      break;
    }
    w -= (w * w * w - a * w - s) / slope;
  }
  return w;
}

}  // namespace

void KirchhoffParams::validate() const {
  if (!(std::isfinite(a) && a >= 0.0)) {
    throw Error(ErrorKind::Precondition, "a must be nonnegative");
  }
  require_positive(b, "b");
  if (N < 1) {
    throw Error(ErrorKind::Precondition, "N must be at least 1");
  }
}

nlohmann::json KirchhoffParams::to_json() const { return {{"a", a}, {"b", b}, {"N", N}}; }

const char* to_string(BranchLabel label) {
  switch (label) {
    case BranchLabel::Unique: return "Unique";
    case BranchLabel::Lower: return "Lower";
    case BranchLabel::Upper: return "Upper";
    case BranchLabel::Tangent: return "Tangent";
    case BranchLabel::ContinuumFree: return "ContinuumFree";
  }
  return "Unique";
}

BranchLabel branch_label_from_string(const std::string& s) {
  for (auto label : {BranchLabel::Unique, BranchLabel::Lower, BranchLabel::Upper,
                     BranchLabel::Tangent, BranchLabel::ContinuumFree}) {
    if (s == to_string(label)) {
      return label;
    }
  }
  throw Error(ErrorKind::Parse, "unknown branch label '" + s + "'");
}

const char* to_string(ExistenceClass c) {
  switch (c) {
    case ExistenceClass::NoBranch: return "NoBranch";
    case ExistenceClass::UniqueBranch: return "UniqueBranch";
    case ExistenceClass::TwoBranches: return "TwoBranches";
    case ExistenceClass::TangentBranch: return "TangentBranch";
    case ExistenceClass::Continuum: return "Continuum";
  }
  return "NoBranch";
}

nlohmann::json CriticalScales::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  if (t_star) j["t_star"] = *t_star;
  if (t_dstar) j["t_dstar"] = *t_dstar;
  if (s_star) j["s_star"] = *s_star;
  if (tau) j["tau"] = *tau;
  if (s_tau) j["s_tau"] = *s_tau;
  return j;
}

nlohmann::json Thresholds::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  if (b_star) j["b_star"] = *b_star;
  if (b_dstar) j["b_dstar"] = *b_dstar;
  if (a_star) j["a_star"] = *a_star;
  if (a_dstar) j["a_dstar"] = *a_dstar;
  return j;
}

double h_eval(double t, double a, int N) {
  return std::pow(t, N - 4) * (1.0 - a * t * t);
}

RootSet h_roots(double s, double a, int N) {
  RootSet out;
  if (N < 1 || !(a >= 0.0)) {
    out.diagnostic = "invalid (a, N)";
    return out;
  }
  if (!std::isfinite(s)) {
    out.diagnostic = "non-finite s";
    return out;
  }
  if (s <= 0.0) {
    out.diagnostic = "s <= 0 does not arise from b*D; no lifting roots reported";
    return out;
  }
  auto unique = [&](double t) { out.roots.push_back({t, BranchLabel::Unique}); };

  switch (N) {
    case 1:
      unique(a == 0.0 ? 1.0 / std::cbrt(s) : 1.0 / depressed_cubic_root(a, s));
      return out;
    case 2:
      unique(1.0 / std::sqrt(s + a));
      return out;
    case 3:
      unique(a == 0.0 ? 1.0 / s : 2.0 / (s + std::sqrt(s * s + 4.0 * a)));
      return out;
    case 4:
      if (a > 0.0) {
        // s within rounding of 1 would give a spurious root near t = 0.
        if (s < 1.0 - kTangentRelTol) {
          unique(std::sqrt((1.0 - s) / a));
        } else {
          out.diagnostic = "N=4: h has range (-inf, 1)";
        }
      } else if (std::fabs(s - 1.0) <= kContinuumRelTol) {
        out.roots.push_back({0.0, BranchLabel::ContinuumFree});
      } else {
        out.diagnostic = "N=4, a=0: h == 1, roots exist only on the continuum s = 1";
      }
      return out;
    default:
      break;
  }

  if (a == 0.0) {
    unique(std::pow(s, 1.0 / (N - 4.0)));
    return out;
  }
  const double t_star = t_star_formula(a, N);
  const double s_star = s_star_formula(a, N);
  if (std::fabs(s - s_star) <= kTangentRelTol * s_star) {
    out.roots.push_back({t_star, BranchLabel::Tangent});
    return out;
  }
  if (s > s_star) {
    out.diagnostic = "s exceeds s_star; no roots";
    return out;
  }
  out.roots.push_back({bisect_h(s, a, N, 0.0, t_star, true), BranchLabel::Lower});
  out.roots.push_back({bisect_h(s, a, N, t_star, 1.0 / std::sqrt(a), false), BranchLabel::Upper});
  return out;
}

CriticalScales critical_scales(double a, int N) {
  CriticalScales cs;
  if (a > 0.0 && N >= 5) {
    cs.t_star = t_star_formula(a, N);
    cs.t_dstar = t_dstar_formula(a, N);
    cs.s_star = s_star_formula(a, N);
  } else if (a > 0.0 && N == 1) {
    cs.tau = std::sqrt(3.0 / a);
    cs.s_tau = -2.0 * std::sqrt(3.0) / 9.0 * std::pow(a, 1.5);
  } else {
    throw Error(ErrorKind::NotApplicable, "critical scales need a > 0 and N = 1 or N >= 5");
  }
  return cs;
}

double g_energy(double t, double a, double b, int N) {
  const double x = 1.0 - a * t * t;
  const double t2 = t * t;
  return x * (4.0 - N * x) / (4.0 * b * N * t2 * t2);
}

Thresholds thresholds_b(double a, int N, double D1) {
  require_positive(D1, "D1");
  Thresholds th;
  if (N == 4) {
    th.b_star = 1.0 / D1;
    return th;
  }
  if (N < 4) {
    throw Error(ErrorKind::NotApplicable, "no b threshold for N <= 3");
  }
  require_positive(a, "a");
  th.b_star = s_star_formula(a, N) / D1;
  th.b_dstar = b_tilde(a, N, D1);
  return th;
}

Thresholds thresholds_a(double b, int N, double D1) {
  require_positive(D1, "D1");
  require_positive(b, "b");
  if (N < 5) {
    throw Error(ErrorKind::NotApplicable, "a thresholds need N >= 5");
  }
  Thresholds th;
  const double exponent = 2.0 / (N - 4.0);
  th.a_star = (N - 4.0) / (N - 2.0) * std::pow(2.0 / ((N - 2.0) * b * D1), exponent);
  th.a_dstar = (N - 4.0) / N * std::pow(4.0 / (N * b * D1), exponent);
  return th;
}

double b_tilde(double a, int N, double D) {
  require_positive(a, "a");
  require_positive(D, "D");
  if (N < 5) {
    throw Error(ErrorKind::NotApplicable, "b_tilde needs N >= 5");
  }
  return 4.0 / N * std::pow((N - 4.0) / (N * a), 0.5 * (N - 4.0)) / D;
}

double psi_n3(double a, double b, double D) {
  if (a == 0.0) {
    throw Error(ErrorKind::DegenerateRequiresA, "psi_n3 needs a > 0");
  }
  require_positive(a, "a");
  const double bD = b * D;
  return 2.0 / (bD + std::sqrt(4.0 * a + bD * bD));
}

double phi_n3(double a, double b, double D) {
  if (a == 0.0) {
    throw Error(ErrorKind::DegenerateRequiresA, "phi_n3 needs a > 0");
  }
  require_positive(a, "a");
  const double bD = b * D;
  const double root = std::sqrt(4.0 * a + bD * bD);
  // a^2 (2 root - bD) D / (3 (root - bD)^2) with root - bD = 4a / (root + bD).
  const double sum = root + bD;
  return (2.0 * root - bD) * D * sum * sum / 48.0;
}

std::optional<double> t_n4(double a, double b, double D) {
  require_positive(a, "a");
  const double bD = b * D;
  if (!(bD < 1.0)) {
    return std::nullopt;
  }
  return std::sqrt((1.0 - bD) / a);
}

std::optional<double> phi_n4(double a, double b, double D) {
  require_positive(a, "a");
  const double bD = b * D;
  if (!(bD < 1.0)) {
    return std::nullopt;
  }
  return a * a * D / (4.0 * (1.0 - bD));
}

double beta_degenerate(double b, int N, double D) {
  require_positive(b, "b");
  require_positive(D, "D");
  if (N < 5) {
    throw Error(ErrorKind::NotApplicable, "beta needs N >= 5");
  }
  // (4 - N) / (4 b N t^4) with t^(N-4) = b D.
  return -(N - 4.0) / (4.0 * N) * std::pow(b, -N / (N - 4.0)) * std::pow(D, -4.0 / (N - 4.0));
}

double c_star(double a, double b, int N) { return a * a / (N * (N - 4.0) * b); }

LevelRoots level_roots_g(double c, double a, double b, int N) {
  if (N < 5) {
    throw Error(ErrorKind::NotApplicable, "level roots need N >= 5");
  }
  require_positive(a, "a");
  require_positive(b, "b");
  const double top = c_star(a, b, N);
  if (!(c > 0.0) || c > top * (1.0 + kTangentRelTol)) {
    throw Error(ErrorKind::OutOfRange, "c must lie in (0, c_star]");
  }
  // a^2 - N (N-4) b c written through c / c_star, exactly 0 at the top.
  const double disc = std::max(0.0, a * a * (1.0 - c / top));
  const double denom = N * (a * a + 4.0 * b * c);
  LevelRoots out;
  out.tau_c = std::sqrt(((N - 2.0) * a - 2.0 * std::sqrt(disc)) / denom);
  out.tau_up_c = std::sqrt(((N - 2.0) * a + 2.0 * std::sqrt(disc)) / denom);
  out.gamma = h_eval(out.tau_up_c, a, N) - h_eval(out.tau_c, a, N);
  return out;
}

ExistenceClass classify_existence(double a, double b, int N, double D) {
  const RootSet rs = h_roots(b * D, a, N);
  if (rs.roots.empty()) {
    return ExistenceClass::NoBranch;
  }
  switch (rs.roots.front().label) {
    case BranchLabel::ContinuumFree: return ExistenceClass::Continuum;
    case BranchLabel::Tangent: return ExistenceClass::TangentBranch;
    case BranchLabel::Lower: return ExistenceClass::TwoBranches;
    default: return ExistenceClass::UniqueBranch;
  }
}

std::vector<LiftCount> count_liftable(double a, double b, int N, const std::vector<double>& D_list) {
  std::vector<LiftCount> out;
  out.reserve(D_list.size());
  for (std::size_t k = 0; k < D_list.size(); ++k) {
    out.push_back({static_cast<int>(k), static_cast<int>(h_roots(b * D_list[k], a, N).roots.size())});
  }
  return out;
}

}  // namespace katlas
