#pragma once

#include "confine/quadrature.hpp"
#include "confine/radial.hpp"

#include <array>
#include <optional>
#include <string>

namespace confine {

// Citation tags attached to every verdict. The string forms are part of the
// CLI/JSON output format.
enum class Rule {
    WeylAlternative,      // "T:W"
    IntegralCriterion,    // "P:M(i)"
    StrongMass,           // "P:M(ii)"
    WeakMass,             // "P:M(iii)"
    PowerThreshold,       // "C:SMF"
    NoMass,               // "L:NES"
    BoundaryField,        // "T:M2"
    CriticalField,        // "P:CM"
    PartialWaves,         // "L:PW"
    ScalarCertificate,    // "T:S"
    HardyCertificate,     // "T:SH"
    PerturbationWust,     // "T:P(i)"
    PerturbationKato,     // "T:P(ii)"
    DistancePotential,    // "T:D1S(i)"
    DistancePotentialFlat,// "T:D1S(ii)"
    MixedThreshold,       // "CO.5"
    ChernoffFamily,       // "Comment3"
    Numeric               // "Numeric"
};
const char* to_string(Rule r);

enum class EndpointClass { LimitPoint, LimitCircle, Inconclusive };
const char* to_string(EndpointClass c);

enum class Method { ClosedFormRule, IntegralCriterion, NumericalSolutionCount };
const char* to_string(Method m);

enum class Verdict { EssentiallySelfAdjoint, NotEssentiallySelfAdjoint, Inconclusive };
const char* to_string(Verdict v);
const char* short_name(Verdict v);  // ESA / NotESA / Inconclusive

struct EndpointClassification {
    Side endpoint = Side::Right;
    EndpointClass cls = EndpointClass::Inconclusive;
    Method method = Method::ClosedFormRule;
    Rule rule = Rule::Numeric;
    // Positive on the limit-point side. Closed form: slack of the threshold
    // inequality. Numerical: -1 minus the fitted dominant exponent.
    double margin = 0.0;
    bool near_threshold = false;
    std::optional<EndpointAsymptotics> asymptotics;
    std::optional<IntegralTest> integral;
    std::optional<L2Count> count;
    std::string note;
};

enum class ForceMethod { Auto, Numerical };

struct ClassifyOptions {
    SolverOptions solver;
    ForceMethod force = ForceMethod::Auto;
};

EndpointClassification endpoint_class(const RadialDiracProblem& p, Side endpoint,
                                      const ClassifyOptions& opt = {});

struct EsaVerdict {
    Verdict verdict = Verdict::Inconclusive;
    std::optional<EndpointClassification> left, right;
    Rule rule = Rule::Numeric;
    std::string note;
};

// Combines two endpoint classes. A limit-circle endpoint decides the verdict
// on its own; otherwise any inconclusive endpoint makes the result inconclusive.
Verdict combine_endpoints(EndpointClass left, EndpointClass right);

// Verdict and citation tag from two endpoint classifications.
EsaVerdict combine_classifications(EndpointClassification left, EndpointClassification right);

EsaVerdict esa_verdict_1d(const RadialDiracProblem& p, const ClassifyOptions& opt = {});

// lambda0^2 <= lambda1^2 + lambda3^2 - 1/4, exactly on the binary values.
bool power_family_verdict(double lambda0, double lambda1, double lambda3);
// lambda_e^2 <= lambda_m^2 + lambda_s^2 - 1/4, exactly.
bool em_threshold_verdict(double lambda_m, double lambda_s, double lambda_e);
// Signed slack lambda1^2 + lambda3^2 - 1/4 - lambda0^2 in double precision.
double power_family_slack(double lambda0, double lambda1, double lambda3);

struct ChernoffVerdict {
    EsaVerdict verdict;
    // tails[sign][end]: sign 0 -> Psi_+, 1 -> Psi_-; end 0 -> +infinity, 1 -> -infinity
    std::array<std::array<IntegralTest, 2>, 2> tails;
    std::array<bool, 2> square_integrable{false, false};
};

// a_alpha D + D a_alpha on the real line with a_alpha = (1 + x^2)^(alpha/2).
ChernoffVerdict chernoff_example_verdict(double alpha);

}  // namespace confine
