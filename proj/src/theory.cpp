#include "cascadelab/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cascadelab/error.hpp"

namespace cascadelab {

namespace {

constexpr std::size_t kNoClass = std::numeric_limits<std::size_t>::max();

double binomial_coefficient(std::size_t k, std::size_t m) {
    if (m > k) return 0.0;
    m = std::min(m, k - m);
    if (k <= 1000) {
        // Exact in double while the running value stays below 2^53.
        double c = 1.0;
        for (std::size_t i = 1; i <= m; ++i) c = c * static_cast<double>(k - m + i) / static_cast<double>(i);
        return c;
    }
    return std::exp(std::lgamma(static_cast<double>(k) + 1.0) - std::lgamma(static_cast<double>(m) + 1.0) -
                    std::lgamma(static_cast<double>(k - m) + 1.0));
}

double safe_ratio(double qb2, double qb1) {
    if (!(qb1 > 0.0)) return 0.0;
    return std::clamp(qb2 / qb1, 0.0, 1.0);
}

void check_phi(double phi1, double phi2) {
    if (!(phi1 >= 0.0 && phi1 <= 1.0) || !(phi2 >= 0.0 && phi2 <= 1.0))
        throw ConfigError("seed fractions must lie in [0, 1]");
    if (phi2 > phi1) throw ConfigError("phi2 must not exceed phi1");
}

}  // namespace

double binomial_pmf(std::size_t m, std::size_t k, double q) {
    if (m > k) return 0.0;
    if (q <= 0.0) return m == 0 ? 1.0 : 0.0;
    if (q >= 1.0) return m == k ? 1.0 : 0.0;
    if (k <= 60)
        return binomial_coefficient(k, m) * std::pow(q, static_cast<double>(m)) *
               std::pow(1.0 - q, static_cast<double>(k - m));
    const double n = static_cast<double>(k), r = static_cast<double>(m);
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0) + r * std::log(q) +
                    (n - r) * std::log1p(-q));
}

BinomialTriangle::BinomialTriangle(std::size_t max_n, double q) : max_n_(max_n), q_(q) {
    data_.assign((max_n + 1) * (max_n + 2) / 2, 0.0);
    data_[0] = 1.0;
    const double p = 1.0 - q;
    for (std::size_t n = 0; n < max_n; ++n) {
        const double* prev = data_.data() + n * (n + 1) / 2;
        double* next = data_.data() + (n + 1) * (n + 2) / 2;
        next[0] = p * prev[0];
        for (std::size_t m = 1; m <= n; ++m) next[m] = q * prev[m - 1] + p * prev[m];
        next[n + 1] = q * prev[n];
    }
}

ModelInputs ModelInputs::factorized(const DegreeDistribution& dist, const ResponseSpec& response, double phi1,
                                    double phi2) {
    return {JointDegreeDistribution::factorized(dist), dist, response, phi1, phi2};
}

ModelInputs ModelInputs::correlated(const JointDegreeDistribution& joint, const ResponseSpec& response, double phi1,
                                    double phi2) {
    return {joint, joint.implied_degree_distribution(), response, phi1, phi2};
}

void ModelInputs::validate() const {
    response.validate();
    check_phi(phi1, phi2);
    if (joint.class_count() == 0) throw ConfigError("model needs a joint degree distribution");
    for (std::size_t k : joint.degrees())
        if (!(degrees[k] > 0.0))
            throw ConfigError("joint degree class " + std::to_string(k) + " has no node mass");
    for (std::size_t k : degrees.support())
        if (k > 0 && !joint.class_of(k))
            throw ConfigError("degree " + std::to_string(k) + " is missing from the joint distribution");
}

double qbar(const JointDegreeDistribution& joint, std::span<const double> q, std::size_t k) {
    const auto i = joint.class_of(k);
    if (!i) throw UndefinedError("q-bar undefined for degree " + std::to_string(k) + ": no edges end there");
    double acc = 0.0;
    for (std::size_t j = 0; j < joint.class_count(); ++j) acc += joint.at(*i, j) * q[j];
    return acc / joint.row_sum(*i);
}

TreeModel::TreeModel(ModelInputs inputs) : in_(std::move(inputs)) {
    in_.validate();
    degrees_ = in_.degrees.support();
    const std::size_t n = degrees_.size();
    weight_.resize(n);
    joint_class_.assign(n, kNoClass);
    node_class_of_joint_.assign(in_.joint.class_count(), kNoClass);
    table_offset_.resize(n);
    std::size_t offset = 0;
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t k = degrees_[c];
        weight_[c] = in_.degrees[k];
        if (k > 0) {
            joint_class_[c] = *in_.joint.class_of(k);
            node_class_of_joint_[joint_class_[c]] = c;
        }
        table_offset_[c] = offset;
        offset += (k + 1) * (k + 1);
        kmax_ = std::max(kmax_, k);
    }
    f1_.assign(offset, 0.0);
    f2_.assign(offset, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t k = degrees_[c];
        for (std::size_t m1 = 0; m1 <= k; ++m1)
            for (std::size_t m2 = 0; m2 <= k; ++m2) {
                f1_[table_index(c, m1, m2)] = cascadelab::response(in_.response, 1, m1, m2, k);
                f2_[table_index(c, m1, m2)] = cascadelab::response(in_.response, 2, m1, m2, k);
            }
    }
}

double TreeModel::response(int stage, std::size_t m1, std::size_t m2, std::size_t c) const {
    if (stage != 1 && stage != 2) throw ConfigError("stage index must be 1 or 2");
    return (stage == 1 ? f1_ : f2_)[table_index(c, m1, m2)];
}

void TreeModel::qbars(std::span<const double> q, std::span<double> out) const {
    for (std::size_t c = 0; c < degrees_.size(); ++c) {
        const std::size_t i = joint_class_[c];
        if (i == kNoClass) {
            out[c] = 0.0;
            continue;
        }
        double acc = 0.0;
        for (std::size_t j = 0; j < in_.joint.class_count(); ++j) acc += in_.joint.at(i, j) * q[node_class_of_joint_[j]];
        out[c] = acc / in_.joint.row_sum(i);
    }
}

TreeModel::ClassValues TreeModel::evaluate_class(std::size_t c, double qb1, double qb2) const {
    const std::size_t k = degrees_[c];
    const double phi1 = in_.phi1;
    const double phi2 = in_.phi2;
    if (k == 0) return {phi1, phi2, phi1, phi2};

    const BinomialTriangle outer(k, qb1);
    const BinomialTriangle inner(k, safe_ratio(qb2, qb1));
    const auto row_k = outer.row(k);
    const auto row_km1 = outer.row(k - 1);

    double s_rho1 = 0.0, s_rho2 = 0.0, s_q1 = 0.0, s_q2 = 0.0;
    for (std::size_t m1 = 0; m1 <= k; ++m1) {
        const auto b = inner.row(m1);
        double a1 = 0.0, a2 = 0.0, a2_up = 0.0;
        for (std::size_t m2 = 0; m2 <= m1; ++m2) {
            a1 += b[m2] * f1_[table_index(c, m1, m2)];
            a2 += b[m2] * f2_[table_index(c, m1, m2)];
            if (m1 < k) a2_up += b[m2] * f2_[table_index(c, m1 + 1, m2)];
        }
        s_rho1 += row_k[m1] * a1;
        s_rho2 += row_k[m1] * a2;
        if (m1 < k) {
            s_q1 += row_km1[m1] * a1;
            s_q2 += row_km1[m1] * ((1.0 - qb1) * a2 + qb1 * a2_up);
        }
    }
    return {phi1 + (1.0 - phi1) * s_rho1, phi2 + (1.0 - phi2) * s_rho2, phi1 + (1.0 - phi1) * s_q1,
            phi2 + (1.0 - phi2) * s_q2};
}

void TreeModel::update_rho(std::span<const double> q1bar, std::span<const double> q2bar, std::span<double> rho1,
                           std::span<double> rho2) const {
    for (std::size_t c = 0; c < degrees_.size(); ++c) {
        const auto v = evaluate_class(c, q1bar[c], q2bar[c]);
        rho1[c] = v.rho1;
        rho2[c] = v.rho2;
    }
}

void TreeModel::update_q(std::span<const double> q1bar, std::span<const double> q2bar, std::span<double> q1,
                         std::span<double> q2) const {
    for (std::size_t c = 0; c < degrees_.size(); ++c) {
        const auto v = evaluate_class(c, q1bar[c], q2bar[c]);
        q1[c] = v.q1;
        q2[c] = v.q2;
    }
}

TheoryState TreeModel::step(const TheoryState& s) const {
    const std::size_t n = degrees_.size();
    std::vector<double> qb1(n), qb2(n);
    qbars(s.q1, qb1);
    qbars(s.q2, qb2);
    TheoryState next{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n),
                     std::vector<double>(n), s.step + 1};
    for (std::size_t c = 0; c < n; ++c) {
        const auto v = evaluate_class(c, qb1[c], qb2[c]);
        next.q1[c] = v.q1;
        next.q2[c] = v.q2;
        next.rho1[c] = v.rho1;
        next.rho2[c] = v.rho2;
    }
    return next;
}

TheoryState TreeModel::initial_state() const {
    const std::size_t n = degrees_.size();
    return {std::vector<double>(n, in_.phi1), std::vector<double>(n, in_.phi2), std::vector<double>(n, in_.phi1),
            std::vector<double>(n, in_.phi2), 0};
}

double TreeModel::aggregate(std::span<const double> rho_k) const {
    double acc = 0.0;
    for (std::size_t c = 0; c < degrees_.size(); ++c) acc += weight_[c] * rho_k[c];
    return acc;
}

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

// ODE state layout: [Q1 | Q2 | rho1 | rho2], one block per class.
class OdeSystem {
public:
    explicit OdeSystem(const TreeModel& model) : model_(model), n_(model.class_count()), qb1_(n_), qb2_(n_) {}

    std::size_t size() const { return 4 * n_; }
    std::size_t classes() const { return n_; }

    void derivative(const std::vector<double>& y, std::vector<double>& dy) {
        std::span<const double> ys(y);
        model_.qbars(ys.subspan(0, n_), qb1_);
        model_.qbars(ys.subspan(n_, n_), qb2_);
        std::span<double> q1(dy.data(), n_), q2(dy.data() + n_, n_), r1(dy.data() + 2 * n_, n_),
            r2(dy.data() + 3 * n_, n_);
        model_.update_q(qb1_, qb2_, q1, q2);
        model_.update_rho(qb1_, qb2_, r1, r2);
        for (std::size_t i = 0; i < dy.size(); ++i) dy[i] -= y[i];
    }

    // Classical RK4; on return k1 holds the derivative at the starting point.
    void rk4(std::vector<double>& y, double h) {
        const std::size_t m = y.size();
        k1_.resize(m);
        k2_.resize(m);
        k3_.resize(m);
        k4_.resize(m);
        tmp_.resize(m);
        derivative(y, k1_);
        for (std::size_t i = 0; i < m; ++i) tmp_[i] = y[i] + 0.5 * h * k1_[i];
        derivative(tmp_, k2_);
        for (std::size_t i = 0; i < m; ++i) tmp_[i] = y[i] + 0.5 * h * k2_[i];
        derivative(tmp_, k3_);
        for (std::size_t i = 0; i < m; ++i) tmp_[i] = y[i] + h * k3_[i];
        derivative(tmp_, k4_);
        for (std::size_t i = 0; i < m; ++i) y[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
        for (double v : y)
            if (!(v >= -1e-9 && v <= 1.0 + 1e-9)) throw NumericalError("ODE state left [0, 1]");
    }

    const std::vector<double>& last_derivative() const { return k1_; }

    std::vector<double> initial() const {
        const auto s = model_.initial_state();
        std::vector<double> y;
        y.reserve(size());
        for (const auto* block : {&s.q1, &s.q2, &s.rho1, &s.rho2}) y.insert(y.end(), block->begin(), block->end());
        return y;
    }

    TheoryState unpack(const std::vector<double>& y) const {
        auto block = [&](std::size_t b) {
            return std::vector<double>(y.begin() + static_cast<std::ptrdiff_t>(b * n_),
                                       y.begin() + static_cast<std::ptrdiff_t>((b + 1) * n_));
        };
        return {block(0), block(1), block(2), block(3), 0};
    }

private:
    const TreeModel& model_;
    std::size_t n_;
    std::vector<double> qb1_, qb2_;
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace

SyncResult iterate_sync(const TreeModel& model, std::size_t max_iter, double tol, std::size_t record_limit) {
    SyncResult out;
    TheoryState cur = model.initial_state();
    if (record_limit > 0) out.trajectory.push_back(cur);
    for (std::size_t n = 1; n <= max_iter; ++n) {
        TheoryState next = model.step(cur);
        const double diff = std::max(max_abs_diff(next.q1, cur.q1), max_abs_diff(next.q2, cur.q2));
        if (out.trajectory.size() < record_limit) out.trajectory.push_back(next);
        cur = std::move(next);
        out.iterations = n;
        if (!std::isfinite(diff)) throw NumericalError("synchronous recurrence produced a non-finite value");
        if (diff < tol) {
            out.converged = true;
            break;
        }
    }
    out.fixpoint = std::move(cur);
    return out;
}

TimeSeries integrate_ode(const TreeModel& model, double t_max, double dt, std::size_t grid_points) {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ConfigError("t_max must be positive");
    if (!(dt > 0.0) || dt > 0.05) throw ConfigError("ODE step must lie in (0, 0.05]");
    if (grid_points < 2) throw ConfigError("need at least two grid points");

    OdeSystem sys(model);
    const std::size_t n = sys.classes();
    TimeSeries ts;
    ts.t = uniform_grid(t_max, grid_points);
    ts.degrees = model.degrees();
    ts.rho1_k.assign(n, std::vector<double>(grid_points));
    ts.rho2_k.assign(n, std::vector<double>(grid_points));
    ts.rho1.resize(grid_points);
    ts.rho2.resize(grid_points);

    const double spacing = t_max / static_cast<double>(grid_points - 1);
    const auto substeps = static_cast<std::size_t>(std::ceil(spacing / dt - 1e-9));
    const double h = spacing / static_cast<double>(substeps);

    std::vector<double> y = sys.initial();
    auto record = [&](std::size_t j) {
        for (std::size_t c = 0; c < n; ++c) {
            ts.rho1_k[c][j] = y[2 * n + c];
            ts.rho2_k[c][j] = y[3 * n + c];
        }
        ts.rho1[j] = model.aggregate(std::span<const double>(y).subspan(2 * n, n));
        ts.rho2[j] = model.aggregate(std::span<const double>(y).subspan(3 * n, n));
    };
    record(0);
    for (std::size_t j = 1; j < grid_points; ++j) {
        for (std::size_t s = 0; s < substeps; ++s) sys.rk4(y, h);
        record(j);
    }
    ts.final_rho1 = ts.rho1.back();
    ts.final_rho2 = ts.rho2.back();
    for (std::size_t c = 0; c < n; ++c) {
        ts.final_rho1_k.push_back(ts.rho1_k[c].back());
        ts.final_rho2_k.push_back(ts.rho2_k[c].back());
    }
    return ts;
}

TheoryState ode_fixpoint(const TreeModel& model, double dt, double tol, double t_limit) {
    if (!(dt > 0.0) || dt > 0.05) throw ConfigError("ODE step must lie in (0, 0.05]");
    OdeSystem sys(model);
    std::vector<double> y = sys.initial();
    std::size_t steps = 0;
    for (double t = 0.0; t <= t_limit; t += dt) {
        sys.rk4(y, dt);
        ++steps;
        const auto& d = sys.last_derivative();
        double worst = 0.0;
        for (double v : d) worst = std::max(worst, std::abs(v));
        if (worst < tol) {
            TheoryState s = sys.unpack(y);
            s.step = steps;
            return s;
        }
    }
    throw NumericalError("ODE did not reach a fixed point within t = " + std::to_string(t_limit));
}

ScalarStep config_model_step(const ModelInputs& inputs, double qbar1, double qbar2) {
    inputs.response.validate();
    check_phi(inputs.phi1, inputs.phi2);
    const DegreeDistribution& dist = inputs.degrees;
    const double z = dist.mean_degree();
    if (!(z > 0.0)) throw UndefinedError("mean degree must be positive");
    const double ratio = qbar1 > 0.0 ? std::min(1.0, qbar2 / qbar1) : 0.0;
    const double phi1 = inputs.phi1, phi2 = inputs.phi2;
    auto f = [&](int stage, std::size_t m1, std::size_t m2, std::size_t k) {
        return response(inputs.response, stage, m1, m2, k);
    };

    ScalarStep out;
    double next1 = 0.0, next2 = 0.0;
    for (std::size_t k : dist.support()) {
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t m1 = 0; m1 <= k; ++m1) {
            const double b1 = binomial_pmf(m1, k, qbar1);
            for (std::size_t m2 = 0; m2 <= m1; ++m2) {
                const double w = b1 * binomial_pmf(m2, m1, ratio);
                s1 += w * f(1, m1, m2, k);
                s2 += w * f(2, m1, m2, k);
            }
        }
        out.rho1_k.push_back(phi1 + (1.0 - phi1) * s1);
        out.rho2_k.push_back(phi2 + (1.0 - phi2) * s2);

        if (k == 0) continue;
        const double edge_weight = static_cast<double>(k) * dist[k] / z;
        double e1 = 0.0, e2 = 0.0;
        for (std::size_t m1 = 0; m1 + 1 <= k; ++m1) {
            const double b1 = binomial_pmf(m1, k - 1, qbar1);
            for (std::size_t m2 = 0; m2 <= m1; ++m2) {
                const double w = b1 * binomial_pmf(m2, m1, ratio);
                e1 += w * f(1, m1, m2, k);
                e2 += w * ((1.0 - qbar1) * f(2, m1, m2, k) + qbar1 * f(2, m1 + 1, m2, k));
            }
        }
        next1 += edge_weight * e1;
        next2 += edge_weight * e2;
    }
    out.rho1 = aggregate(out.rho1_k, dist);
    out.rho2 = aggregate(out.rho2_k, dist);
    out.qbar1_next = phi1 + (1.0 - phi1) * next1;
    out.qbar2_next = phi2 + (1.0 - phi2) * next2;
    return out;
}

double aggregate(std::span<const double> rho_k, const DegreeDistribution& dist) {
    const auto support = dist.support();
    if (rho_k.size() != support.size()) throw ConfigError("rho_k does not match the degree support");
    double acc = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) acc += dist[support[i]] * rho_k[i];
    return acc;
}

}  // namespace cascadelab
