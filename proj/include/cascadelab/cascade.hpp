#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cascadelab/degree_distribution.hpp"
#include "cascadelab/response.hpp"

namespace cascadelab {

using Point2 = std::array<double, 2>;
// jacobian[i][j] = D_j g^(i).
using Matrix2 = std::array<std::array<double, 2>, 2>;

// F_i(m1, m2, k) tabulated for m2 <= m1 <= k <= kmax.
class ResponseTable {
public:
    ResponseTable(const ResponseSpec& spec, std::size_t kmax);

    double f(int stage, std::size_t m1, std::size_t m2, std::size_t k) const {
        return (stage == 1 ? f1_ : f2_)[offset(k) + m1 * (m1 + 1) / 2 + m2];
    }
    std::size_t kmax() const noexcept { return kmax_; }
    const ResponseSpec& spec() const noexcept { return spec_; }

private:
    static std::size_t offset(std::size_t k) {
        // sum over k' < k of (k'+1)(k'+2)/2
        return k * (k + 1) * (k + 2) / 6;
    }
    ResponseSpec spec_;
    std::size_t kmax_;
    std::vector<double> f1_;
    std::vector<double> f2_;
};

struct MapEvaluation {
    Point2 value;
    Matrix2 jacobian;
};

// The scalar configuration-model map q -> g~(q), q = (q-bar1, q-bar2).
//
// Points with q2 > q1 are evaluated at (q1, q1), so the map is continuous on
// the whole unit square. The Jacobian is exact: writing the nested binomials
// as a trinomial in (q2, q1 - q2, 1 - q1), each partial derivative is n times
// an expectation over n - 1 children of a one-neighbor difference of F.
class ReducedMap {
public:
    ReducedMap(DegreeDistribution dist, const ResponseSpec& spec, double phi1, double phi2);
    // Shares `table`, which must cover dist.kmax().
    ReducedMap(DegreeDistribution dist, std::shared_ptr<const ResponseTable> table, double phi1, double phi2);

    Point2 operator()(Point2 q) const;
    MapEvaluation evaluate(Point2 q) const;

    // Aggregate (rho1, rho2) of a degree-distributed population whose
    // neighbors are active with probabilities q.
    Point2 rho(Point2 q) const;

    const DegreeDistribution& distribution() const noexcept { return dist_; }
    const ResponseSpec& response() const noexcept { return table_->spec(); }
    double phi1() const noexcept { return phi1_; }
    double phi2() const noexcept { return phi2_; }

private:
    MapEvaluation eval(Point2 q, bool with_jacobian) const;

    DegreeDistribution dist_;
    std::shared_ptr<const ResponseTable> table_;
    double phi1_;
    double phi2_;
    double z_;
};

// The four partial derivatives of g~ at the origin, each as a direct sum over k.
struct Partials {
    double d1g1 = 0.0;
    double d2g1 = 0.0;
    double d1g2 = 0.0;
    double d2g2 = 0.0;
};
Partials partials_at_zero(const DegreeDistribution& dist, const ResponseSpec& spec, double phi1, double phi2);

// D2g1 D1g2 - (D1g1 - 1)(D2g2 - 1).
double condition_value(const Matrix2& jacobian);

struct CascadeCondition {
    bool cascade = false;
    double value = 0.0;
};
CascadeCondition cascade_condition(const DegreeDistribution& dist, const ResponseSpec& spec, double phi1,
                                   double phi2);

struct Equilibrium {
    Point2 q{};
    Matrix2 jacobian{};
    // Largest eigenvalue of Dg~ - I; negative means stable.
    double leading_eigenvalue = 0.0;
    // tr^2 - 4 det of Dg~.
    double discriminant = 0.0;
    double residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

struct EquilibriumOptions {
    double tol = 1e-10;
    std::size_t max_iter = 100000;
    // Newton polishing starts once the fixed-point step falls below this.
    double polish_below = 1e-6;
};

// Fixed-point iteration from q0, polished by Newton on g~(q) - q. A Newton
// result is kept only if it lies in the unit square, has a smaller residual,
// and is not below the iterate (the iteration from a seed point increases
// monotonically to the nearest fixed point above it).
Equilibrium find_equilibrium(const ReducedMap& map, Point2 q0, const EquilibriumOptions& opts = {});

// (g~1(q) - q1, g~2(q) - q2, condition value of Dg~(q)).
std::array<double, 3> saddle_node_residual(const ReducedMap& map, Point2 q);

// Named scalar inputs of a scenario that continuation and sweeps can vary.
enum class Parameter { MeanDegree, Beta, R1, R2, Phi1, Phi2 };

std::string parameter_name(Parameter p);
// Accepts "z", "beta", "R1", "R2", "phi1", "phi2" (case-insensitive); throws ConfigError.
Parameter parse_parameter(const std::string& name);

// A reduced-map scenario: Poisson degrees with a given mean (or a fixed
// distribution), a response, and seed fractions. R1 and R2 address the
// threshold value, or the mean of a Gaussian threshold.
struct Scenario {
    std::optional<DegreeDistribution> degrees;
    double mean_degree = 1.0;
    ResponseSpec response;
    double phi1 = 0.0;
    double phi2 = 0.0;
    // Poisson truncation; 0 selects DegreeDistribution::poisson_cutoff(mean_degree).
    std::size_t kmax = 0;

    double get(Parameter p) const;
    void set(Parameter p, double v);
    DegreeDistribution distribution() const;
    ReducedMap map() const;
    // Throws ConfigError when the response or the seed fractions are invalid.
    void validate() const;
};

// Aggregate finals of the theory fixpoint reached from the seed point.
struct FinalState {
    Point2 q{};
    double rho1 = 0.0;
    double rho2 = 0.0;
    bool converged = false;
};
FinalState final_state(const ReducedMap& map, const EquilibriumOptions& opts = {});

struct SaddleNode {
    Point2 q{};
    double p1 = 0.0;
    double p2 = 0.0;
    std::array<double, 3> residual{};
};

// Newton on (q1, q2, p1) at fixed p2 for the saddle-node system. Returns
// empty when the iteration fails to reach max |residual| < tol within
// max_iter steps or leaves the unit square.
std::optional<SaddleNode> solve_saddle_node(const Scenario& base, Parameter p1, Parameter p2, double p2_value,
                                            Point2 q_guess, double p1_guess, double tol = 1e-11,
                                            std::size_t max_iter = 30);

// Scans p1 over [lo, hi] with p2 fixed for a discontinuous jump in rho1 of
// the seeded fixpoint, brackets it by bisection and solves for the saddle
// node from the low-activity side.
std::optional<SaddleNode> find_saddle_node(const Scenario& base, Parameter p1, double lo, double hi,
                                           Parameter p2, double p2_value, std::size_t scan_points = 60);

struct CurvePoint {
    double p1 = 0.0;
    double p2 = 0.0;
    Point2 q{};
    std::array<double, 3> residual{};
    // Index of the branch; a new index starts after an end-of-branch.
    std::size_t branch = 0;
};

struct BoundaryCurve {
    Parameter p1 = Parameter::MeanDegree;
    Parameter p2 = Parameter::Beta;
    std::vector<CurvePoint> points;
};

struct ContinuationOptions {
    double initial_step = 0.01;
    double min_step = 1e-5;
    double max_step = 0.05;
    // Points with p1 outside [p1_lo, p1_hi] end the branch.
    double p1_lo = -1e300;
    double p1_hi = 1e300;
};

// Secant-predictor / Newton-corrector continuation in (q1, q2, p1) with p2
// stepped from start.p2 toward p2_end. The step halves on corrector failure
// and grows after easy steps; the branch ends when the step would drop below
// min_step. The returned points all belong to one branch and start with `start`.
std::vector<CurvePoint> continue_saddle_node(const Scenario& base, Parameter p1, Parameter p2,
                                             const SaddleNode& start, double p2_end,
                                             const ContinuationOptions& opts = {});

struct Axis {
    Parameter param = Parameter::MeanDegree;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 1;

    // count uniform values over [lo, hi]; a single value is lo.
    std::vector<double> values() const;
};

// Traces saddle-node branches across the p2 axis: a start is searched at p2
// grid values from the middle outwards, continued in both directions, and
// re-seeded at the next grid value beyond each end of branch.
BoundaryCurve trace_boundary(const Scenario& base, const Axis& p1, const Axis& p2,
                             const ContinuationOptions& opts = {});

struct SweepCell {
    double p1 = 0.0;
    double p2 = 0.0;
    // False when the parameters are rejected by validation (e.g. R1 > R2).
    bool admissible = true;
    bool converged = false;
    double rho1 = 0.0;
    double rho2 = 0.0;
    double condition = 0.0;
};

struct SweepResult {
    Axis axis1;
    Axis axis2;
    // Row-major over (p2 index, p1 index).
    std::vector<SweepCell> cells;

    const SweepCell& at(std::size_t i1, std::size_t i2) const { return cells[i2 * axis1.count + i1]; }
};

// Theory fixpoints and cascade-condition values on a grid. When either axis
// is the mean degree, the Poisson truncation of every cell is that of the
// largest mean on the grid, so neighboring cells share one truncation.
SweepResult sweep_diagram(const Scenario& base, const Axis& axis1, const Axis& axis2, unsigned threads = 0,
                          const EquilibriumOptions& opts = {});

}  // namespace cascadelab
