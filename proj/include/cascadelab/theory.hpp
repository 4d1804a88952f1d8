#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cascadelab/degree_distribution.hpp"
#include "cascadelab/response.hpp"
#include "cascadelab/time_series.hpp"

namespace cascadelab {

// B_m^k(q) = C(k, m) q^m (1 - q)^(k - m).
double binomial_pmf(std::size_t m, std::size_t k, double q);

// Rows 0..max_n of the binomial pmf at a fixed q, built by the convex
// recurrence B^{n+1}_m = q B^n_{m-1} + (1 - q) B^n_m.
class BinomialTriangle {
public:
    BinomialTriangle() = default;
    BinomialTriangle(std::size_t max_n, double q);

    std::span<const double> row(std::size_t n) const {
        return {data_.data() + n * (n + 1) / 2, n + 1};
    }
    double q() const noexcept { return q_; }
    std::size_t max_n() const noexcept { return max_n_; }

private:
    std::size_t max_n_ = 0;
    double q_ = 0.0;
    std::vector<double> data_;
};

// Everything the tree approximation needs about one scenario.
struct ModelInputs {
    JointDegreeDistribution joint;
    // Node degree distribution used for aggregation; may contain k = 0.
    DegreeDistribution degrees;
    ResponseSpec response;
    double phi1 = 0.0;
    double phi2 = 0.0;

    // Configuration-model case: P(k,k') = k P_k k' P_k' / z^2.
    static ModelInputs factorized(const DegreeDistribution& dist, const ResponseSpec& response, double phi1,
                                  double phi2);
    // Degree-correlated case: P_k implied by the joint marginals.
    static ModelInputs correlated(const JointDegreeDistribution& joint, const ResponseSpec& response, double phi1,
                                  double phi2);

    void validate() const;
};

// q-bar_k: average of q over the neighbors of a degree-k node, weighted by
// row k of the joint distribution. `q` is indexed by joint class. Throws
// UndefinedError when k is not a joint class.
double qbar(const JointDegreeDistribution& joint, std::span<const double> q, std::size_t k);

// Vectors q_k^(i) and rho_k^(i) over the model's degree classes.
struct TheoryState {
    std::vector<double> q1;
    std::vector<double> q2;
    std::vector<double> rho1;
    std::vector<double> rho2;
    std::size_t step = 0;
};

// The vector recurrence, with response tables precomputed per class.
//
// Classes are the degrees carrying node mass (the support of P_k). For each
// class k the model evaluates, given q-bar values for that class,
//   rho_k^(i) = phi_i + (1 - phi_i) sum_{m1<=k} B^k_{m1}(qb1) sum_{m2<=m1} B^{m1}_{m2}(qb2/qb1) F_i(m1,m2,k)
//   q_k^(1)   = phi_1 + (1 - phi_1) sum_{m1<=k-1} B^{k-1}_{m1}(qb1) sum B^{m1}_{m2}(.) F_1(m1,m2,k)
//   q_k^(2)   = phi_2 + (1 - phi_2) sum_{m1<=k-1} B^{k-1}_{m1}(qb1) sum B^{m1}_{m2}(.)
//                 [(1 - qb1) F_2(m1,m2,k) + qb1 F_2(m1+1,m2,k)]
// The ratio qb2/qb1 is taken as 0 when qb1 = 0 and clipped to 1 above.
class TreeModel {
public:
    explicit TreeModel(ModelInputs inputs);

    const ModelInputs& inputs() const noexcept { return in_; }
    const std::vector<std::size_t>& degrees() const noexcept { return degrees_; }
    std::size_t class_count() const noexcept { return degrees_.size(); }
    // P_k of class c.
    double weight(std::size_t c) const noexcept { return weight_[c]; }

    double response(int stage, std::size_t m1, std::size_t m2, std::size_t c) const;

    // Per-class q-bar from per-class q (classes without edges get 0).
    void qbars(std::span<const double> q, std::span<double> out) const;

    // rho from q-bar.
    void update_rho(std::span<const double> q1bar, std::span<const double> q2bar, std::span<double> rho1,
                    std::span<double> rho2) const;

    // q(n+1) from q-bar(n).
    void update_q(std::span<const double> q1bar, std::span<const double> q2bar, std::span<double> q1,
                  std::span<double> q2) const;

    // One synchronous step: state(n) -> state(n+1).
    TheoryState step(const TheoryState& s) const;

    // Q(0) = phi, rho(0) = phi.
    TheoryState initial_state() const;

    // Degree-weighted aggregate over the classes.
    double aggregate(std::span<const double> rho_k) const;

private:
    std::size_t table_index(std::size_t c, std::size_t m1, std::size_t m2) const {
        const std::size_t k = degrees_[c];
        return table_offset_[c] + m1 * (k + 1) + m2;
    }
    struct ClassValues {
        double rho1, rho2, q1, q2;
    };
    ClassValues evaluate_class(std::size_t c, double qb1, double qb2) const;

    ModelInputs in_;
    std::vector<std::size_t> degrees_;
    std::vector<double> weight_;
    // Joint class of each node class (npos for degree 0) and the reverse map.
    std::vector<std::size_t> joint_class_;
    std::vector<std::size_t> node_class_of_joint_;
    // F tables: F_i(m1, m2, k) for m1, m2 in [0, k]; row stride k + 1.
    std::vector<std::size_t> table_offset_;
    std::vector<double> f1_;
    std::vector<double> f2_;
    std::size_t kmax_ = 0;
};

struct SyncResult {
    // States 0..n for the first `record_limit` steps.
    std::vector<TheoryState> trajectory;
    TheoryState fixpoint;
    std::size_t iterations = 0;
    bool converged = false;
};

// Iterates the synchronous map from Q(0) = phi until ||Q(n) - Q(n-1)||_inf < tol
// or max_iter steps. Non-convergence is reported through `converged`.
SyncResult iterate_sync(const TreeModel& model, std::size_t max_iter = 100000, double tol = 1e-10,
                        std::size_t record_limit = 1000);

// Integrates dQ/dt = g(Q) - Q, d rho/dt = h(Q) - rho with classical RK4 and a
// step no larger than dt, sampling `grid_points` uniform times in [0, t_max].
// Throws NumericalError if a component leaves [-1e-9, 1 + 1e-9].
TimeSeries integrate_ode(const TreeModel& model, double t_max, double dt = 0.01, std::size_t grid_points = 200);

// Runs the ODE until max |g(Q) - Q| < tol (or t_limit) and returns the state.
TheoryState ode_fixpoint(const TreeModel& model, double dt = 0.01, double tol = 1e-11, double t_limit = 1e5);

// One step of the scalar configuration-model recurrence. Only valid when the
// joint distribution factorizes.
struct ScalarStep {
    std::vector<double> rho1_k;
    std::vector<double> rho2_k;
    double rho1 = 0.0;
    double rho2 = 0.0;
    double qbar1_next = 0.0;
    double qbar2_next = 0.0;
};
ScalarStep config_model_step(const ModelInputs& inputs, double qbar1, double qbar2);

// sum_k P_k rho_k over the support of `dist`; rho_k is indexed like dist.support().
double aggregate(std::span<const double> rho_k, const DegreeDistribution& dist);

}  // namespace cascadelab
