#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

#include "opde/error.hpp"
#include "opde/operator_model.hpp"
#include "opde/pencil.hpp"

namespace opde {

enum class Verdict { RegularlySolvableCertified, Uncertified, InadmissibleWeight };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::RegularlySolvableCertified: return "REGULARLY_SOLVABLE_CERTIFIED";
    case Verdict::Uncertified: return "UNCERTIFIED";
    case Verdict::InadmissibleWeight: return "INADMISSIBLE_WEIGHT";
  }
  return "UNKNOWN";
}

/// gamma = 1 - kappa^2 / (4 lambda0^2); positive iff |kappa| < 2 lambda0.
inline double gamma(double lambda0, double kappa) { return 1.0 - kappa * kappa / (4.0 * lambda0 * lambda0); }

/// c_1 = c_3 = gamma^{-1/2} / 2, c_2 = gamma^{-1/2} / (2 sqrt 2), c_4 = gamma^{-1}.
inline std::array<double, 4> constants(double lambda0, double kappa) {
  require_admissible(lambda0, kappa);
  const double g = gamma(lambda0, kappa);
  const double root = 1.0 / std::sqrt(g);
  return {0.5 * root, root / (2.0 * std::numbers::sqrt2), 0.5 * root, 1.0 / g};
}

struct SolvabilityCertificate {
  double kappa = 0.0;
  double lambda0 = 0.0;
  double gamma = 0.0;
  std::array<double, 4> c{};     // +inf when the weight is inadmissible
  std::array<double, 4> beta{};  // ||A_j A^{-j}||
  double q = 0.0;                // sum_j c_j beta_j
  bool admissible = false;
  Verdict verdict = Verdict::InadmissibleWeight;
};

inline SolvabilityCertificate certify(const OperatorModel& a, const PerturbationSet& p, double kappa) {
  SolvabilityCertificate cert;
  cert.kappa = kappa;
  cert.lambda0 = a.lambda0();
  cert.gamma = gamma(cert.lambda0, kappa);
  cert.beta = p.beta;
  cert.admissible = admissible_weight(cert.lambda0, kappa);
  if (!cert.admissible) {
    cert.c.fill(std::numeric_limits<double>::infinity());
    cert.q = p.is_zero() ? 0.0 : std::numeric_limits<double>::infinity();
    cert.verdict = Verdict::InadmissibleWeight;
    return cert;
  }
  cert.c = constants(cert.lambda0, kappa);
  for (std::size_t j = 0; j < 4; ++j) cert.q += cert.c[j] * cert.beta[j];
  cert.verdict = cert.q < 1.0 ? Verdict::RegularlySolvableCertified : Verdict::Uncertified;
  return cert;
}

struct SweepRow {
  double kappa = 0.0;
  double gamma = 0.0;
  std::array<double, 4> c{};
  double q = 0.0;
  Verdict verdict = Verdict::InadmissibleWeight;
};

/// Certificate over a list of weights; shows c_4 = 1/gamma blowing up as
/// |kappa| approaches 2 lambda0 and flags |kappa| >= 2 lambda0.
inline std::vector<SweepRow> critical_sweep(const OperatorModel& a, std::span<const double> kappas,
                                            const PerturbationSet& p) {
  std::vector<SweepRow> rows;
  rows.reserve(kappas.size());
  for (double kappa : kappas) {
    const SolvabilityCertificate cert = certify(a, p, kappa);
    rows.push_back({kappa, cert.gamma, cert.c, cert.q, cert.verdict});
  }
  return rows;
}

inline std::vector<SweepRow> critical_sweep(const OperatorModel& a, std::span<const double> kappas) {
  return critical_sweep(a, kappas, zero_perturbations(a));
}

/// kappa_min, kappa_min + step, ... up to kappa_max (inclusive within step/2).
inline std::vector<double> kappa_range(double kappa_min, double kappa_max, double step) {
  if (!(step > 0.0) || kappa_max < kappa_min) throw Error(ErrorKind::ConfigInvalid, "bad kappa range");
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((kappa_max - kappa_min) / step + 0.5));
  for (long i = 0; i <= count; ++i) {
    double k = kappa_min + static_cast<double>(i) * step;
    // Snap values that should be exact multiples of the step (e.g. -2.0).
    const double snapped = std::round(k / step) * step;
    if (std::abs(snapped - k) < 1e-9 * step) k = snapped;
    out.push_back(k);
  }
  return out;
}

}  // namespace opde
