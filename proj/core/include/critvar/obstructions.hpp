#pragma once

#include <optional>
#include <string>

#include "critvar/energy.hpp"
#include "json.hpp"

namespace critvar {

enum class Verdict { PohozaevObstruction, NegativeI1, CouplingTooLarge, NoObstructionFound };

const char* to_string(Verdict v) noexcept;

struct ObstructionVerdict {
  Verdict verdict = Verdict::NoObstructionFound;
  /// Finite for every verdict except NoObstructionFound: the Pohozaev integral,
  /// the I_1 upper bound, or the margin A - Lambda_N of the coupling bound.
  double witness_value = std::numeric_limits<double>::quiet_NaN();
  /// Field with ||u||_{2*} = 1 and Q(u) < 0 for NegativeI1.
  std::optional<Field> witness_field;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
  nlohmann::ordered_json to_json() const;
};

/// int <grad h(x), x> u^2 / |x|^2. Errors: nondifferentiable-preset.
double pohozaev_integral(const CoefficientProfile& h, const Field& u, int N);
double pohozaev_integral(const CoefficientProfile& h, const Field& u, const QuadratureSettings& set);

struct I1Estimate {
  /// Smallest Q(u)/||u||_{2*}^2 found: an upper bound for I_1.
  double upper_bound = std::numeric_limits<double>::infinity();
  bool negative = false;
  /// Minimizing seed (after descent when the spec is radial), normalized in L^{2*}.
  Field witness;
  std::string seed;
};

/// Upper bound for I_1 = inf {Q(u) : ||u||_{2*} = 1} from ground states at
/// couplings {0.9, 0.99, 0.999} Lambda_N, Talenti bubbles at several scales
/// and, for radial specs, a short preconditioned descent of the quotient on
/// the solver lattice starting from each seed. Seeds run concurrently.
I1Estimate estimate_I1(const ProblemSpec& spec);

struct AuditOptions {
  int probes = 10000;
  unsigned long long seed = 0x5eed1234ULL;
  /// Radius of the ball where A + h >= 0 is checked for the I_1 test.
  double delta = 0.1;
};

/// A > Lambda_N with h >= 0 or ||h|| <= A/Lambda_N, then fixed sign of <grad h, x> on probe points, then
/// I_1 < 0 together with A + h >= 0 near the origin.
ObstructionVerdict nonexistence_audit(const ProblemSpec& spec, const AuditOptions& opts = {});

}  // namespace critvar
