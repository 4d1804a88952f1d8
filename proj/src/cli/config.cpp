#include "cascadelab/cli/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cascadelab/error.hpp"

namespace cascadelab::cli {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

void require_map(const YAML::Node& node, const std::string& where) {
    if (!node.IsMap()) throw ConfigError(where + ": expected a mapping");
}

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where) {
    require_map(node, where);
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& where) {
    if (!node.IsScalar()) throw ConfigError(where + ": expected a scalar");
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(where + ": cannot read '" + node.Scalar() + "'");
    }
}

double number(const YAML::Node& node, const std::string& where) {
    if (node.IsScalar()) {
        const auto s = lower(node.Scalar());
        if (s == "inf" || s == ".inf" || s == "infinity") return kInfiniteThreshold;
    }
    return scalar<double>(node, where);
}

std::size_t count(const YAML::Node& node, const std::string& where) {
    const double v = scalar<double>(node, where);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e15) throw ConfigError(where + ": expected a non-negative integer");
    return static_cast<std::size_t>(v);
}

ThresholdLaw threshold(const YAML::Node& node, const std::string& where) {
    if (node.IsMap()) {
        check_keys(node, {"mean", "sigma"}, where);
        if (!node["mean"] || !node["sigma"]) throw ConfigError(where + ": Gaussian threshold needs mean and sigma");
        return ThresholdLaw::gaussian(number(node["mean"], where + ".mean"), number(node["sigma"], where + ".sigma"));
    }
    return ThresholdLaw::fixed(number(node, where));
}

NetworkConfig parse_network(const YAML::Node& n, const std::filesystem::path& base) {
    check_keys(n, {"kind", "nodes", "mean_degree", "degrees", "joint", "path", "resample"}, "network");
    NetworkConfig c;
    if (!n["kind"]) throw ConfigError("network.kind is required");
    const auto kind = lower(scalar<std::string>(n["kind"], "network.kind"));
    if (kind == "erdos_renyi" || kind == "er") c.kind = NetworkKind::ErdosRenyi;
    else if (kind == "configuration") c.kind = NetworkKind::Configuration;
    else if (kind == "correlated") c.kind = NetworkKind::Correlated;
    else if (kind == "edge_list") c.kind = NetworkKind::EdgeList;
    else throw ConfigError("network.kind: expected erdos_renyi, configuration, correlated or edge_list");
    if (n["nodes"]) c.nodes = count(n["nodes"], "network.nodes");
    if (n["mean_degree"]) c.mean_degree = number(n["mean_degree"], "network.mean_degree");
    if (n["degrees"]) {
        require_map(n["degrees"], "network.degrees");
        for (const auto& kv : n["degrees"])
            c.degree_weights[count(kv.first, "network.degrees key")] = number(kv.second, "network.degrees value");
    }
    if (n["joint"]) {
        if (!n["joint"].IsSequence()) throw ConfigError("network.joint: expected a list of [k, k', weight]");
        for (const auto& e : n["joint"]) {
            if (!e.IsSequence() || e.size() != 3) throw ConfigError("network.joint: entries are [k, k', weight]");
            c.joint.emplace_back(count(e[0], "network.joint k"), count(e[1], "network.joint k'"),
                                 number(e[2], "network.joint weight"));
        }
    }
    if (n["path"]) {
        std::filesystem::path p = scalar<std::string>(n["path"], "network.path");
        c.path = p.is_absolute() ? p : base / p;
    }
    if (n["resample"]) c.resample = scalar<bool>(n["resample"], "network.resample");
    return c;
}

ResponseSpec parse_model(const YAML::Node& m) {
    check_keys(m, {"scale", "beta", "r1", "r2"}, "model");
    ResponseSpec r;
    if (m["scale"]) {
        const auto s = lower(scalar<std::string>(m["scale"], "model.scale"));
        if (s == "fraction") r.scale = PressureScale::Fraction;
        else if (s == "count") r.scale = PressureScale::Count;
        else throw ConfigError("model.scale: expected fraction or count");
    }
    if (m["beta"]) r.beta = number(m["beta"], "model.beta");
    if (!m["r1"]) throw ConfigError("model.r1 is required");
    r.thresholds[0] = threshold(m["r1"], "model.r1");
    r.thresholds[1] = m["r2"] ? threshold(m["r2"], "model.r2") : ThresholdLaw::fixed(kInfiniteThreshold);
    return r;
}

SimConfig parse_run(const YAML::Node& r) {
    check_keys(r, {"phi1", "phi2", "mode", "t_max", "grid_points", "realizations", "seed", "seed_policy", "threads"},
               "run");
    SimConfig c;
    if (r["phi1"]) c.phi1 = number(r["phi1"], "run.phi1");
    if (r["phi2"]) c.phi2 = number(r["phi2"], "run.phi2");
    if (r["mode"]) {
        const auto s = lower(scalar<std::string>(r["mode"], "run.mode"));
        if (s == "asynchronous" || s == "async") c.mode = UpdateMode::Asynchronous;
        else if (s == "synchronous" || s == "sync") c.mode = UpdateMode::Synchronous;
        else throw ConfigError("run.mode: expected asynchronous or synchronous");
    }
    if (r["t_max"]) c.t_max = number(r["t_max"], "run.t_max");
    if (r["grid_points"]) c.grid_points = count(r["grid_points"], "run.grid_points");
    if (r["realizations"]) c.realizations = count(r["realizations"], "run.realizations");
    if (r["seed"]) c.rng_seed = scalar<std::uint64_t>(r["seed"], "run.seed");
    if (r["seed_policy"]) {
        const auto s = lower(scalar<std::string>(r["seed_policy"], "run.seed_policy"));
        if (s == "resample") c.seed_policy = SeedPolicy::Resample;
        else if (s == "fixed") c.seed_policy = SeedPolicy::Fixed;
        else throw ConfigError("run.seed_policy: expected resample or fixed");
    }
    if (r["threads"]) c.threads = static_cast<unsigned>(count(r["threads"], "run.threads"));
    return c;
}

TheoryConfig parse_theory(const YAML::Node& t) {
    check_keys(t, {"method", "dt", "steps", "overlay"}, "theory");
    TheoryConfig c;
    if (t["method"]) {
        const auto s = lower(scalar<std::string>(t["method"], "theory.method"));
        if (s == "ode") c.method = TheoryMethod::Ode;
        else if (s == "map") c.method = TheoryMethod::Map;
        else throw ConfigError("theory.method: expected ode or map");
    }
    if (t["dt"]) c.dt = number(t["dt"], "theory.dt");
    if (t["steps"]) c.steps = count(t["steps"], "theory.steps");
    if (t["overlay"]) c.overlay = scalar<bool>(t["overlay"], "theory.overlay");
    return c;
}

Axis parse_axis(const YAML::Node& a, const std::string& where) {
    check_keys(a, {"param", "lo", "hi", "count"}, where);
    if (!a["param"] || !a["lo"]) throw ConfigError(where + ": param and lo are required");
    Axis axis;
    axis.param = parse_parameter(scalar<std::string>(a["param"], where + ".param"));
    axis.lo = number(a["lo"], where + ".lo");
    axis.count = a["count"] ? count(a["count"], where + ".count") : 1;
    axis.hi = a["hi"] ? number(a["hi"], where + ".hi") : axis.lo;
    return axis;
}

CascadeConfig parse_cascade(const YAML::Node& c) {
    check_keys(c, {"condition", "x", "y", "continuation"}, "cascade");
    CascadeConfig out;
    if (c["condition"]) out.condition = scalar<bool>(c["condition"], "cascade.condition");
    if (c["x"]) out.x = parse_axis(c["x"], "cascade.x");
    if (c["y"]) out.y = parse_axis(c["y"], "cascade.y");
    if (c["continuation"]) out.continuation = scalar<bool>(c["continuation"], "cascade.continuation");
    return out;
}

OutputConfig parse_output(const YAML::Node& o, const std::filesystem::path& base) {
    check_keys(o, {"dir", "svg"}, "output");
    OutputConfig c;
    if (o["dir"]) {
        std::filesystem::path p = scalar<std::string>(o["dir"], "output.dir");
        c.dir = p.is_absolute() ? p : base / p;
    }
    if (o["svg"]) c.svg = scalar<bool>(o["svg"], "output.svg");
    return c;
}

}  // namespace

std::string network_kind_name(NetworkKind kind) {
    switch (kind) {
        case NetworkKind::ErdosRenyi: return "erdos_renyi";
        case NetworkKind::Configuration: return "configuration";
        case NetworkKind::Correlated: return "correlated";
        case NetworkKind::EdgeList: return "edge_list";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    response.validate();
    run.validate();
    if (!(theory.dt > 0.0 && theory.dt <= 0.05)) throw ConfigError("theory.dt must lie in (0, 0.05]");
    const auto& n = network;
    switch (n.kind) {
        case NetworkKind::ErdosRenyi:
            if (n.nodes < 2) throw ConfigError("network.nodes must be at least 2");
            if (!(n.mean_degree > 0.0) || !(n.mean_degree < static_cast<double>(n.nodes)))
                throw ConfigError("network.mean_degree must lie in (0, nodes)");
            break;
        case NetworkKind::Configuration:
            if (n.nodes < 2) throw ConfigError("network.nodes must be at least 2");
            if (n.degree_weights.empty()) throw ConfigError("network.degrees is required for a configuration model");
            (void)DegreeDistribution::from_weights(n.degree_weights);
            break;
        case NetworkKind::Correlated:
            if (n.nodes < 2) throw ConfigError("network.nodes must be at least 2");
            if (n.joint.empty()) throw ConfigError("network.joint is required for a correlated network");
            (void)JointDegreeDistribution::from_weights(n.joint);
            break;
        case NetworkKind::EdgeList:
            if (n.path.empty()) throw ConfigError("network.path is required for an edge list");
            break;
    }
    for (const auto* axis : {&cascade.x, &cascade.y}) {
        if (!*axis) continue;
        if ((*axis)->count == 0) throw ConfigError("cascade axis count must be positive");
        if (!std::isfinite((*axis)->lo) || !std::isfinite((*axis)->hi)) throw ConfigError("cascade axis bounds must be finite");
        if ((*axis)->param == Parameter::MeanDegree && n.kind != NetworkKind::ErdosRenyi)
            throw ConfigError("sweeping z requires an erdos_renyi network");
    }
    if (cascade.y && !cascade.x) throw ConfigError("cascade.y needs cascade.x");
    if (cascade.x && cascade.y && cascade.x->param == cascade.y->param)
        throw ConfigError("cascade axes must vary different parameters");
    if (cascade.continuation && !(cascade.x && cascade.y))
        throw ConfigError("cascade.continuation needs both sweep axes");
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config is not valid YAML: ") + e.what());
    }
    check_keys(root, {"name", "network", "model", "run", "theory", "cascade", "output"}, "config");
    ExperimentConfig c;
    if (root["name"]) c.name = scalar<std::string>(root["name"], "name");
    if (!root["network"]) throw ConfigError("network section is required");
    if (!root["model"]) throw ConfigError("model section is required");
    c.network = parse_network(root["network"], base_dir);
    c.response = parse_model(root["model"]);
    if (root["run"]) c.run = parse_run(root["run"]);
    if (root["theory"]) c.theory = parse_theory(root["theory"]);
    if (root["cascade"]) c.cascade = parse_cascade(root["cascade"]);
    if (root["output"]) c.output = parse_output(root["output"], base_dir);
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

}  // namespace cascadelab::cli
