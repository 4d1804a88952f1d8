#include "cascadelab/cascade.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "cascadelab/error.hpp"
#include "cascadelab/parallel.hpp"
#include "cascadelab/theory.hpp"

namespace cascadelab {

namespace {

double inf_norm(const std::array<double, 3>& r) {
    return std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2])});
}

bool in_unit_square(Point2 q, double slack = 1e-12) {
    return q[0] >= -slack && q[0] <= 1.0 + slack && q[1] >= -slack && q[1] <= 1.0 + slack;
}

bool affects_response(Parameter p) {
    return p == Parameter::Beta || p == Parameter::R1 || p == Parameter::R2;
}

// Solves a x = b for a 3x3 system by Gaussian elimination with partial pivoting.
std::optional<std::array<double, 3>> solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3> b) {
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (!(std::abs(a[piv][col]) > 1e-300)) return std::nullopt;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < 3; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 3; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::array<double, 3> x{};
    for (int r = 2; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < 3; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return x;
}

// Builds maps for scenarios that differ only in degrees or seeds without
// re-tabulating the response.
class MapFactory {
public:
    ReducedMap make(const Scenario& s) {
        s.validate();
        DegreeDistribution dist = s.distribution();
        const std::size_t kmax = dist.kmax();
        if (!table_ || table_->kmax() < kmax || !same_response(table_->spec(), s.response))
            table_ = std::make_shared<const ResponseTable>(s.response, kmax);
        return ReducedMap(std::move(dist), table_, s.phi1, s.phi2);
    }

private:
    static bool same_law(const ThresholdLaw& a, const ThresholdLaw& b) {
        return a.kind == b.kind && a.value == b.value && a.sigma == b.sigma;
    }
    static bool same_response(const ResponseSpec& a, const ResponseSpec& b) {
        return a.beta == b.beta && a.scale == b.scale && same_law(a.thresholds[0], b.thresholds[0]) &&
               same_law(a.thresholds[1], b.thresholds[1]);
    }
    std::shared_ptr<const ResponseTable> table_;
};

}  // namespace

ResponseTable::ResponseTable(const ResponseSpec& spec, std::size_t kmax) : spec_(spec), kmax_(kmax) {
    spec_.validate();
    const std::size_t size = offset(kmax + 1);
    f1_.resize(size);
    f2_.resize(size);
    for (std::size_t k = 0; k <= kmax; ++k)
        for (std::size_t m1 = 0; m1 <= k; ++m1)
            for (std::size_t m2 = 0; m2 <= m1; ++m2) {
                const std::size_t i = offset(k) + m1 * (m1 + 1) / 2 + m2;
                f1_[i] = cascadelab::response(spec_, 1, m1, m2, k);
                f2_[i] = cascadelab::response(spec_, 2, m1, m2, k);
            }
}

ReducedMap::ReducedMap(DegreeDistribution dist, const ResponseSpec& spec, double phi1, double phi2)
    : ReducedMap(dist, std::make_shared<const ResponseTable>(spec, dist.kmax()), phi1, phi2) {}

ReducedMap::ReducedMap(DegreeDistribution dist, std::shared_ptr<const ResponseTable> table, double phi1,
                       double phi2)
    : dist_(std::move(dist)), table_(std::move(table)), phi1_(phi1), phi2_(phi2), z_(dist_.mean_degree()) {
    if (!table_ || table_->kmax() < dist_.kmax()) throw ConfigError("response table does not cover kmax");
    if (!(z_ > 0.0)) throw ConfigError("reduced map needs a positive mean degree");
    if (!(phi1 >= 0.0 && phi1 <= 1.0) || !(phi2 >= 0.0 && phi2 <= phi1))
        throw ConfigError("seed fractions must satisfy 0 <= phi2 <= phi1 <= 1");
}

Point2 ReducedMap::operator()(Point2 q) const { return eval(q, false).value; }

MapEvaluation ReducedMap::evaluate(Point2 q) const { return eval(q, true); }

MapEvaluation ReducedMap::eval(Point2 q, bool with_jacobian) const {
    const double q1 = std::clamp(q[0], 0.0, 1.0);
    const double q2_raw = std::clamp(q[1], 0.0, 1.0);
    const bool clipped = q2_raw > q1;
    const double q2 = std::min(q2_raw, q1);
    const double r = q1 > 0.0 ? std::min(1.0, q2 / q1) : 0.0;

    const std::size_t kmax = dist_.kmax();
    const BinomialTriangle outer(kmax, q1);
    const BinomialTriangle inner(kmax, r);
    const ResponseTable& t = *table_;

    double g1 = 0.0, g2 = 0.0, d11 = 0.0, d12 = 0.0, d21 = 0.0, d22 = 0.0;
    std::vector<double> a1(kmax + 1), a2(kmax + 1), u1(kmax + 1), u2(kmax + 1);
    for (std::size_t k = 1; k <= kmax; ++k) {
        const double w = static_cast<double>(k) * dist_[k] / z_;
        if (w == 0.0) continue;
        const std::size_t n = k - 1;
        for (std::size_t m1 = 0; m1 <= n; ++m1) {
            const auto b = inner.row(m1);
            double s_a1 = 0.0, s_a2 = 0.0, s_u1 = 0.0, s_u2 = 0.0;
            for (std::size_t m2 = 0; m2 <= m1; ++m2) {
                s_a1 += b[m2] * t.f(1, m1, m2, k);
                s_a2 += b[m2] * t.f(2, m1, m2, k);
                s_u1 += b[m2] * t.f(1, m1 + 1, m2, k);
                s_u2 += b[m2] * t.f(2, m1 + 1, m2, k);
            }
            a1[m1] = s_a1;
            a2[m1] = s_a2;
            u1[m1] = s_u1;
            u2[m1] = s_u2;
        }
        const auto row_n = outer.row(n);
        double e1 = 0.0, e2 = 0.0, explicit_q1 = 0.0;
        for (std::size_t m1 = 0; m1 <= n; ++m1) {
            e1 += row_n[m1] * a1[m1];
            e2 += row_n[m1] * ((1.0 - q1) * a2[m1] + q1 * u2[m1]);
            explicit_q1 += row_n[m1] * (u2[m1] - a2[m1]);
        }
        g1 += w * e1;
        g2 += w * e2;
        if (!with_jacobian) continue;

        double s11 = 0.0, s12 = 0.0, s21 = 0.0, s22 = 0.0;
        if (n > 0) {
            const auto row_m = outer.row(n - 1);
            for (std::size_t m1 = 0; m1 + 1 <= n; ++m1) {
                const auto b = inner.row(m1);
                double d1 = 0.0, d2 = 0.0, d2_up = 0.0, v2 = 0.0;
                for (std::size_t m2 = 0; m2 <= m1; ++m2) {
                    d1 += b[m2] * (t.f(1, m1 + 1, m2 + 1, k) - t.f(1, m1 + 1, m2, k));
                    d2 += b[m2] * (t.f(2, m1 + 1, m2 + 1, k) - t.f(2, m1 + 1, m2, k));
                    d2_up += b[m2] * (t.f(2, m1 + 2, m2 + 1, k) - t.f(2, m1 + 2, m2, k));
                    v2 += b[m2] * t.f(2, m1 + 2, m2, k);
                }
                s11 += row_m[m1] * (u1[m1] - a1[m1]);
                s12 += row_m[m1] * d1;
                s21 += row_m[m1] * ((1.0 - q1) * (u2[m1] - a2[m1]) + q1 * (v2 - u2[m1]));
                s22 += row_m[m1] * ((1.0 - q1) * d2 + q1 * d2_up);
            }
        }
        const double nn = static_cast<double>(n);
        d11 += w * nn * s11;
        d12 += w * nn * s12;
        d21 += w * (explicit_q1 + nn * s21);
        d22 += w * nn * s22;
    }

    MapEvaluation out{};
    out.value = {phi1_ + (1.0 - phi1_) * g1, phi2_ + (1.0 - phi2_) * g2};
    if (with_jacobian) {
        out.jacobian = {{{(1.0 - phi1_) * d11, (1.0 - phi1_) * d12}, {(1.0 - phi2_) * d21, (1.0 - phi2_) * d22}}};
        if (clipped) {
            for (auto& row : out.jacobian) {
                row[0] += row[1];
                row[1] = 0.0;
            }
        }
    }
    return out;
}

Point2 ReducedMap::rho(Point2 q) const {
    const double q1 = std::clamp(q[0], 0.0, 1.0);
    const double q2 = std::min(std::clamp(q[1], 0.0, 1.0), q1);
    const double r = q1 > 0.0 ? std::min(1.0, q2 / q1) : 0.0;
    const std::size_t kmax = dist_.kmax();
    const BinomialTriangle outer(kmax, q1);
    const BinomialTriangle inner(kmax, r);
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k <= kmax; ++k) {
        if (dist_[k] == 0.0) continue;
        const auto row = outer.row(k);
        double e1 = 0.0, e2 = 0.0;
        for (std::size_t m1 = 0; m1 <= k; ++m1) {
            const auto b = inner.row(m1);
            for (std::size_t m2 = 0; m2 <= m1; ++m2) {
                e1 += row[m1] * b[m2] * table_->f(1, m1, m2, k);
                e2 += row[m1] * b[m2] * table_->f(2, m1, m2, k);
            }
        }
        s1 += dist_[k] * e1;
        s2 += dist_[k] * e2;
    }
    return {phi1_ + (1.0 - phi1_) * s1, phi2_ + (1.0 - phi2_) * s2};
}

Partials partials_at_zero(const DegreeDistribution& dist, const ResponseSpec& spec, double phi1, double phi2) {
    const double z = dist.mean_degree();
    if (!(z > 0.0)) throw ConfigError("partials at zero need a positive mean degree");
    Partials p;
    for (std::size_t k : dist.support()) {
        if (k == 0) continue;
        const double kk = static_cast<double>(k);
        const double pk = dist[k];
        auto f = [&](int stage, std::size_t m1, std::size_t m2) { return response(spec, stage, m1, m2, k); };
        p.d1g1 += kk * (kk - 1.0) * pk / z * (f(1, 1, 0) - f(1, 0, 0));
        p.d2g1 += kk * (kk - 1.0) * pk / z * (f(1, 1, 1) - f(1, 1, 0));
        p.d1g2 += kk * kk * pk / z * (f(2, 1, 0) - f(2, 0, 0));
        p.d2g2 += kk * (kk - 1.0) * pk / z * (f(2, 1, 1) - f(2, 1, 0));
    }
    p.d1g1 *= 1.0 - phi1;
    p.d2g1 *= 1.0 - phi1;
    p.d1g2 *= 1.0 - phi2;
    p.d2g2 *= 1.0 - phi2;
    return p;
}

double condition_value(const Matrix2& j) {
    return j[0][1] * j[1][0] - (j[0][0] - 1.0) * (j[1][1] - 1.0);
}

CascadeCondition cascade_condition(const DegreeDistribution& dist, const ResponseSpec& spec, double phi1,
                                   double phi2) {
    const Partials p = partials_at_zero(dist, spec, phi1, phi2);
    const double v = condition_value({{{p.d1g1, p.d2g1}, {p.d1g2, p.d2g2}}});
    return {v > 0.0, v};
}

namespace {

void describe(const ReducedMap& map, Equilibrium& e) {
    const auto ev = map.evaluate(e.q);
    e.jacobian = ev.jacobian;
    e.residual = std::max(std::abs(ev.value[0] - e.q[0]), std::abs(ev.value[1] - e.q[1]));
    const double tr = ev.jacobian[0][0] + ev.jacobian[1][1];
    const double det = ev.jacobian[0][0] * ev.jacobian[1][1] - ev.jacobian[0][1] * ev.jacobian[1][0];
    e.discriminant = tr * tr - 4.0 * det;
    e.leading_eigenvalue = 0.5 * (tr + std::sqrt(std::max(0.0, e.discriminant))) - 1.0;
}

std::optional<Point2> newton_polish(const ReducedMap& map, Point2 q, double tol) {
    Point2 x = q;
    for (int it = 0; it < 20; ++it) {
        const auto ev = map.evaluate(x);
        const double f0 = ev.value[0] - x[0];
        const double f1 = ev.value[1] - x[1];
        if (std::max(std::abs(f0), std::abs(f1)) < tol) return x;
        const double a = ev.jacobian[0][0] - 1.0, b = ev.jacobian[0][1];
        const double c = ev.jacobian[1][0], d = ev.jacobian[1][1] - 1.0;
        const double det = a * d - b * c;
        if (!(std::abs(det) > 1e-14)) return std::nullopt;
        x[0] -= (d * f0 - b * f1) / det;
        x[1] -= (a * f1 - c * f0) / det;
        if (!in_unit_square(x, 1e-9)) return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace

Equilibrium find_equilibrium(const ReducedMap& map, Point2 q0, const EquilibriumOptions& opts) {
    Equilibrium e;
    Point2 q{std::clamp(q0[0], 0.0, 1.0), std::clamp(q0[1], 0.0, 1.0)};
    double next_polish = opts.polish_below;
    for (std::size_t it = 1; it <= opts.max_iter; ++it) {
        const Point2 next = map(q);
        const double step = std::max(std::abs(next[0] - q[0]), std::abs(next[1] - q[1]));
        const bool rising = next[0] >= q[0] && next[1] >= q[1];
        q = next;
        e.iterations = it;
        if (!std::isfinite(step)) throw NumericalError("reduced map produced a non-finite value");
        if (step < opts.tol) {
            e.q = q;
            describe(map, e);
            if (e.residual < opts.tol) {
                e.converged = true;
                return e;
            }
        }
        if (step < next_polish) {
            next_polish = step / 10.0;
            if (auto x = newton_polish(map, q, opts.tol)) {
                const bool near = std::max(std::abs((*x)[0] - q[0]), std::abs((*x)[1] - q[1])) < 1e-2;
                const bool above = !rising || ((*x)[0] >= q[0] - 1e-12 && (*x)[1] >= q[1] - 1e-12);
                if (near && above) {
                    e.q = {std::clamp((*x)[0], 0.0, 1.0), std::clamp((*x)[1], 0.0, 1.0)};
                    describe(map, e);
                    if (e.residual < opts.tol) {
                        e.converged = true;
                        return e;
                    }
                }
            }
        }
    }
    e.q = q;
    describe(map, e);
    e.converged = e.residual < opts.tol;
    return e;
}

std::array<double, 3> saddle_node_residual(const ReducedMap& map, Point2 q) {
    const auto ev = map.evaluate(q);
    return {ev.value[0] - q[0], ev.value[1] - q[1], condition_value(ev.jacobian)};
}

std::string parameter_name(Parameter p) {
    switch (p) {
        case Parameter::MeanDegree: return "z";
        case Parameter::Beta: return "beta";
        case Parameter::R1: return "R1";
        case Parameter::R2: return "R2";
        case Parameter::Phi1: return "phi1";
        case Parameter::Phi2: return "phi2";
    }
    return "?";
}

Parameter parse_parameter(const std::string& name) {
    std::string s = name;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "z" || s == "mean_degree") return Parameter::MeanDegree;
    if (s == "beta") return Parameter::Beta;
    if (s == "r1") return Parameter::R1;
    if (s == "r2") return Parameter::R2;
    if (s == "phi1") return Parameter::Phi1;
    if (s == "phi2") return Parameter::Phi2;
    throw ConfigError("unknown parameter '" + name + "' (expected z, beta, R1, R2, phi1 or phi2)");
}

double Scenario::get(Parameter p) const {
    switch (p) {
        case Parameter::MeanDegree: return degrees ? degrees->mean_degree() : mean_degree;
        case Parameter::Beta: return response.beta;
        case Parameter::R1: return response.thresholds[0].value;
        case Parameter::R2: return response.thresholds[1].value;
        case Parameter::Phi1: return phi1;
        case Parameter::Phi2: return phi2;
    }
    return 0.0;
}

void Scenario::set(Parameter p, double v) {
    switch (p) {
        case Parameter::MeanDegree:
            if (degrees) throw ConfigError("mean degree is fixed by an explicit degree distribution");
            mean_degree = v;
            break;
        case Parameter::Beta: response.beta = v; break;
        case Parameter::R1: response.thresholds[0].value = v; break;
        case Parameter::R2: response.thresholds[1].value = v; break;
        case Parameter::Phi1: phi1 = v; break;
        case Parameter::Phi2: phi2 = v; break;
    }
}

DegreeDistribution Scenario::distribution() const {
    if (degrees) return *degrees;
    if (!(mean_degree > 0.0) || !std::isfinite(mean_degree)) throw ConfigError("mean degree must be positive");
    return DegreeDistribution::poisson(mean_degree, kmax ? kmax : DegreeDistribution::poisson_cutoff(mean_degree));
}

ReducedMap Scenario::map() const {
    validate();
    return ReducedMap(distribution(), response, phi1, phi2);
}

void Scenario::validate() const {
    response.validate();
    if (!(phi1 >= 0.0 && phi1 <= 1.0) || !(phi2 >= 0.0 && phi2 <= 1.0))
        throw ConfigError("seed fractions must lie in [0, 1]");
    if (phi2 > phi1) throw ConfigError("phi2 must not exceed phi1");
    if (!degrees && (!(mean_degree > 0.0) || !std::isfinite(mean_degree)))
        throw ConfigError("mean degree must be positive");
}

FinalState final_state(const ReducedMap& map, const EquilibriumOptions& opts) {
    const Equilibrium e = find_equilibrium(map, {map.phi1(), map.phi2()}, opts);
    const Point2 r = map.rho(e.q);
    return {e.q, r[0], r[1], e.converged};
}

namespace {

std::optional<SaddleNode> solve_with(MapFactory& factory, const Scenario& base, Parameter p1, Parameter p2,
                                     double p2_value, Point2 q, double p1_value, double tol,
                                     std::size_t max_iter) {
    Scenario s = base;
    s.set(p2, p2_value);
    auto residual_at = [&](Point2 qq, double pv) -> std::optional<std::array<double, 3>> {
        try {
            s.set(p1, pv);
            return saddle_node_residual(factory.make(s), qq);
        } catch (const ConfigError&) {
            return std::nullopt;
        }
    };
    auto r = residual_at(q, p1_value);
    if (!r) return std::nullopt;
    for (std::size_t it = 0; it <= max_iter; ++it) {
        if (inf_norm(*r) < tol) return SaddleNode{q, p1_value, p2_value, *r};
        if (it == max_iter) break;

        std::array<std::array<double, 3>, 3> jac{};
        s.set(p1, p1_value);
        const ReducedMap map = factory.make(s);
        const auto ev = map.evaluate(q);
        jac[0][0] = ev.jacobian[0][0] - 1.0;
        jac[0][1] = ev.jacobian[0][1];
        jac[1][0] = ev.jacobian[1][0];
        jac[1][1] = ev.jacobian[1][1] - 1.0;
        for (int j = 0; j < 2; ++j) {
            const double h = 1e-6;
            Point2 qp = q, qm = q;
            qp[j] += h;
            qm[j] -= h;
            jac[2][j] = (condition_value(map.evaluate(qp).jacobian) - condition_value(map.evaluate(qm).jacobian)) /
                        (2.0 * h);
        }
        const double hp = 1e-6 * std::max(1.0, std::abs(p1_value));
        const auto rp = residual_at(q, p1_value + hp);
        const auto rm = residual_at(q, p1_value - hp);
        if (!rp || !rm) return std::nullopt;
        for (int i = 0; i < 3; ++i) jac[i][2] = ((*rp)[i] - (*rm)[i]) / (2.0 * hp);

        const auto dx = solve3(jac, {-(*r)[0], -(*r)[1], -(*r)[2]});
        if (!dx) return std::nullopt;
        // Damped update: halve until the residual decreases.
        bool improved = false;
        double lambda = 1.0;
        for (int h = 0; h < 12 && !improved; ++h, lambda *= 0.5) {
            const Point2 qn{q[0] + lambda * (*dx)[0], q[1] + lambda * (*dx)[1]};
            const double pn = p1_value + lambda * (*dx)[2];
            if (!in_unit_square(qn)) continue;
            const auto rn = residual_at(qn, pn);
            if (!rn || !(inf_norm(*rn) < inf_norm(*r))) continue;
            q = qn;
            p1_value = pn;
            r = rn;
            improved = true;
        }
        if (!improved) return std::nullopt;
    }
    return std::nullopt;
}

std::optional<SaddleNode> find_with(MapFactory& factory, const Scenario& base, Parameter p1, double lo, double hi,
                                    Parameter p2, double p2_value, std::size_t scan_points) {
    Scenario s = base;
    s.set(p2, p2_value);
    auto solve_at = [&](double v) -> std::optional<FinalState> {
        try {
            s.set(p1, v);
            return final_state(factory.make(s));
        } catch (const ConfigError&) {
            return std::nullopt;
        }
    };
    const std::size_t n = std::max<std::size_t>(scan_points, 2);
    std::vector<double> xs(n);
    std::vector<std::optional<FinalState>> fs(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        fs[i] = solve_at(xs[i]);
    }
    std::vector<std::pair<double, std::size_t>> jumps;
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (fs[i] && fs[i + 1]) {
            const double d = std::abs(fs[i + 1]->rho1 - fs[i]->rho1);
            if (d > 0.05) jumps.emplace_back(d, i);
        }
    std::sort(jumps.rbegin(), jumps.rend());
    for (const auto& [size, i] : jumps) {
        double a = xs[i], b = xs[i + 1];
        FinalState fa = *fs[i], fb = *fs[i + 1];
        const double width = 1e-7 * std::max(1.0, std::abs(hi - lo));
        while (b - a > width) {
            const double m = 0.5 * (a + b);
            const auto fm = solve_at(m);
            if (!fm) break;
            if (std::abs(fm->rho1 - fa.rho1) < std::abs(fm->rho1 - fb.rho1)) {
                a = m;
                fa = *fm;
            } else {
                b = m;
                fb = *fm;
            }
        }
        if (std::abs(fb.rho1 - fa.rho1) < 0.02) continue;  // continuous transition
        const bool low_at_a = fa.rho1 < fb.rho1;
        const FinalState& low = low_at_a ? fa : fb;
        const double p_low = low_at_a ? a : b;
        auto sn = solve_with(factory, base, p1, p2, p2_value, low.q, p_low, 1e-11, 30);
        if (sn && std::abs(sn->p1 - p_low) < 1e-3 * std::max(1.0, std::abs(p_low))) return sn;
    }
    return std::nullopt;
}

std::size_t poisson_truncation(const Scenario& base, std::initializer_list<const Axis*> axes) {
    if (base.degrees || base.kmax) return base.kmax;
    double zmax = base.mean_degree;
    for (const Axis* a : axes)
        if (a->param == Parameter::MeanDegree) zmax = std::max({zmax, a->lo, a->hi});
    return DegreeDistribution::poisson_cutoff(zmax);
}

}  // namespace

std::optional<SaddleNode> solve_saddle_node(const Scenario& base, Parameter p1, Parameter p2, double p2_value,
                                            Point2 q_guess, double p1_guess, double tol, std::size_t max_iter) {
    MapFactory factory;
    return solve_with(factory, base, p1, p2, p2_value, q_guess, p1_guess, tol, max_iter);
}

std::optional<SaddleNode> find_saddle_node(const Scenario& base, Parameter p1, double lo, double hi, Parameter p2,
                                           double p2_value, std::size_t scan_points) {
    MapFactory factory;
    return find_with(factory, base, p1, lo, hi, p2, p2_value, scan_points);
}

std::vector<CurvePoint> continue_saddle_node(const Scenario& base, Parameter p1, Parameter p2,
                                             const SaddleNode& start, double p2_end,
                                             const ContinuationOptions& opts) {
    MapFactory factory;
    std::vector<CurvePoint> out{{start.p1, start.p2, start.q, start.residual, 0}};
    const double dir = p2_end >= start.p2 ? 1.0 : -1.0;
    double h = opts.initial_step;
    while (dir * (p2_end - out.back().p2) > 1e-12) {
        const CurvePoint& cur = out.back();
        const double step = std::min(h, dir * (p2_end - cur.p2));
        const double p2_next = cur.p2 + dir * step;
        Point2 q_pred = cur.q;
        double p1_pred = cur.p1;
        if (out.size() >= 2) {
            const CurvePoint& prev = out[out.size() - 2];
            const double s = (p2_next - cur.p2) / (cur.p2 - prev.p2);
            q_pred = {cur.q[0] + s * (cur.q[0] - prev.q[0]), cur.q[1] + s * (cur.q[1] - prev.q[1])};
            p1_pred = cur.p1 + s * (cur.p1 - prev.p1);
            if (!in_unit_square(q_pred)) q_pred = cur.q;
        }
        auto sn = solve_with(factory, base, p1, p2, p2_next, q_pred, p1_pred, 1e-11, 30);
        const bool ok = sn && sn->p1 >= opts.p1_lo && sn->p1 <= opts.p1_hi &&
                        std::abs(sn->q[0] - cur.q[0]) < 0.1 && std::abs(sn->q[1] - cur.q[1]) < 0.1 &&
                        std::abs(sn->p1 - cur.p1) < 0.1 * std::max(1.0, std::abs(cur.p1));
        if (ok) {
            out.push_back({sn->p1, sn->p2, sn->q, sn->residual, 0});
            h = std::min(opts.max_step, h * 1.5);
        } else {
            h *= 0.5;
            if (h < opts.min_step) break;
        }
    }
    return out;
}

std::vector<double> Axis::values() const {
    if (count == 0) throw ConfigError("axis needs at least one value");
    if (count == 1) return {lo};
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i)
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return v;
}

BoundaryCurve trace_boundary(const Scenario& base_in, const Axis& p1, const Axis& p2,
                             const ContinuationOptions& opts_in) {
    Scenario base = base_in;
    base.kmax = poisson_truncation(base_in, {&p1, &p2});
    ContinuationOptions opts = opts_in;
    opts.p1_lo = std::max(opts.p1_lo, std::min(p1.lo, p1.hi));
    opts.p1_hi = std::min(opts.p1_hi, std::max(p1.lo, p1.hi));

    BoundaryCurve curve{p1.param, p2.param, {}};
    const auto grid = p2.values();
    if (grid.size() < 2 || p1.count < 2) return curve;
    MapFactory factory;
    auto seed_at = [&](double v) { return find_with(factory, base, p1.param, p1.lo, p1.hi, p2.param, v, p1.count); };

    std::vector<std::vector<CurvePoint>> branches;
    // A start just past `from` in direction `dir`, else at the first grid value beyond it.
    auto reseed = [&](double from, double dir) -> std::optional<SaddleNode> {
        const double nudge = from + dir * 1e-3;
        if (dir > 0 ? nudge <= grid.back() : nudge >= grid.front())
            if (auto sn = seed_at(nudge)) return sn;
        if (dir > 0) {
            for (double v : grid)
                if (v > from + 1e-12)
                    if (auto sn = seed_at(v)) return sn;
        } else {
            for (auto it = grid.rbegin(); it != grid.rend(); ++it)
                if (*it < from - 1e-12)
                    if (auto sn = seed_at(*it)) return sn;
        }
        return std::nullopt;
    };
    // Continues toward one end of the grid, re-seeding past each end of branch.
    auto walk = [&](SaddleNode start, double toward, bool include_start) {
        const double dir = toward >= start.p2 ? 1.0 : -1.0;
        for (;;) {
            auto pts = continue_saddle_node(base, p1.param, p2.param, start, toward, opts);
            const double reached = pts.back().p2;
            if (!include_start) pts.erase(pts.begin());
            include_start = true;
            if (!pts.empty()) branches.push_back(std::move(pts));
            if (std::abs(reached - toward) < 1e-12) return;
            auto next = reseed(reached, dir);
            if (!next) return;
            start = *next;
        }
    };

    std::vector<std::size_t> order(grid.size());
    const std::size_t mid = grid.size() / 2;
    for (std::size_t i = 0, lo = mid, hi = mid + 1; i < grid.size(); ++i) {
        if (i % 2 == 0 && lo < grid.size()) order[i] = lo--;
        else if (hi < grid.size()) order[i] = hi++;
        else order[i] = lo--;
    }
    for (std::size_t idx : order) {
        if (auto start = seed_at(grid[idx])) {
            walk(*start, grid.back(), true);
            walk(*start, grid.front(), false);
            break;
        }
    }

    for (auto& b : branches) std::sort(b.begin(), b.end(), [](const auto& x, const auto& y) { return x.p2 < y.p2; });
    std::sort(branches.begin(), branches.end(),
              [](const auto& x, const auto& y) { return x.front().p2 < y.front().p2; });
    // The two walks from one start meet at that start; join them.
    std::vector<std::vector<CurvePoint>> merged;
    for (auto& b : branches) {
        if (!merged.empty() && std::abs(merged.back().back().p2 - b.front().p2) < 1e-12 &&
            std::abs(merged.back().back().p1 - b.front().p1) < 1e-9) {
            merged.back().insert(merged.back().end(), b.begin() + 1, b.end());
        } else {
            merged.push_back(std::move(b));
        }
    }
    for (std::size_t i = 0; i < merged.size(); ++i)
        for (auto& pt : merged[i]) {
            pt.branch = i;
            curve.points.push_back(pt);
        }
    return curve;
}

SweepResult sweep_diagram(const Scenario& base_in, const Axis& axis1, const Axis& axis2, unsigned threads,
                          const EquilibriumOptions& opts) {
    Scenario base = base_in;
    base.kmax = poisson_truncation(base_in, {&axis1, &axis2});
    const auto v1 = axis1.values();
    const auto v2 = axis2.values();
    SweepResult out{axis1, axis2, std::vector<SweepCell>(v1.size() * v2.size())};

    // Response tables shared by cells with the same response.
    const bool r1 = affects_response(axis1.param), r2 = affects_response(axis2.param);
    std::map<std::size_t, std::shared_ptr<const ResponseTable>> tables;
    auto table_key = [&](std::size_t i1, std::size_t i2) { return r1 ? i1 : i2; };
    if (!(r1 && r2)) {
        const std::size_t keys = r1 ? v1.size() : r2 ? v2.size() : 1;
        for (std::size_t key = 0; key < keys; ++key) {
            Scenario s = base;
            if (r1) s.set(axis1.param, v1[key]);
            if (r2) s.set(axis2.param, v2[key]);
            try {
                s.validate();
                tables[key] = std::make_shared<const ResponseTable>(s.response, s.distribution().kmax());
            } catch (const ConfigError&) {
            }
        }
    }

    parallel_for(out.cells.size(), threads, [&](std::size_t idx) {
        const std::size_t i1 = idx % v1.size(), i2 = idx / v1.size();
        SweepCell& cell = out.cells[idx];
        cell.p1 = v1[i1];
        cell.p2 = v2[i2];
        Scenario s = base;
        try {
            s.set(axis1.param, v1[i1]);
            s.set(axis2.param, v2[i2]);
            s.validate();
        } catch (const ConfigError&) {
            cell.admissible = false;
            return;
        }
        DegreeDistribution dist = s.distribution();
        std::shared_ptr<const ResponseTable> table;
        if (!(r1 && r2)) {
            auto it = tables.find(r1 || r2 ? table_key(i1, i2) : 0);
            if (it != tables.end() && it->second->kmax() >= dist.kmax()) table = it->second;
        }
        if (!table) table = std::make_shared<const ResponseTable>(s.response, dist.kmax());
        const ReducedMap map(dist, table, s.phi1, s.phi2);
        const FinalState f = final_state(map, opts);
        cell.converged = f.converged;
        cell.rho1 = f.rho1;
        cell.rho2 = f.rho2;
        cell.condition = cascade_condition(dist, s.response, s.phi1, s.phi2).value;
    });
    return out;
}

}  // namespace cascadelab
