#include "quadcone/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace quadcone::harness {

using nlohmann::json;
using quadform::QuadraticForm;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) { return std::chrono::duration<double, std::milli>(Clock::now() - t0).count(); }

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
    throw ConfigError("config." + field + ": " + msg);
}

template <class T>
T get(const json& j, const std::string& field) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        fail(field, "wrong type");
    }
}

Vec4d vec4d(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 4) fail(field, "expected an array of 4 numbers");
    Vec4d v;
    for (int i = 0; i < 4; ++i)
        v[i] = get<double>(j[i], field + "[" + std::to_string(i) + "]");
    return v;
}

Vec4 vec4(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 4) fail(field, "expected an array of 4 integers");
    Vec4 v;
    for (int i = 0; i < 4; ++i) {
        if (!j[i].is_number_integer()) fail(field + "[" + std::to_string(i) + "]", "expected an integer");
        v[i] = j[i].get<i64>();
    }
    return v;
}

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) fail(where.empty() ? "<root>" : where, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) fail((where.empty() ? "" : where + ".") + it.key(), "unknown field");
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

int n_components(const QuadraticForm& F) { return F.components.count; }

// components the weight can see
std::vector<int> weight_components(const QuadraticForm& F, const WeightSpec& w) {
    if (w.component >= 0) return {w.component};
    std::vector<int> out;
    for (int c = 0; c < n_components(F); ++c)
        out.push_back(c);
    return out;
}

lattice::WeightFunction on_component(const WeightSpec& w, int c) {
    WeightSpec s = w;
    s.component = c;
    return s.make();
}

i64 first_nonresidue_unit(const QuadraticForm& F, i64 L) {
    for (i64 g = 2; g < L; ++g)
        if (std::gcd(g, L) == 1 && quadform::psi_F(F, g) == -1) return g;
    return 0;
}

Row make_row(const std::string& exp, double B, i64 L, i64 gamma, int psi, double emp, double pred, double xi,
             double ms) {
    Row r;
    r.experiment = exp;
    r.B = B;
    r.L = L;
    r.gamma = gamma;
    r.psi = psi;
    r.empirical = emp;
    r.predicted = pred;
    r.ratio = pred != 0 ? emp / pred : emp;
    r.xi = xi;
    r.runtime_ms = ms;
    return r;
}

void window_verdict(Report& rep, const ExperimentConfig& cfg, const std::string& name) {
    if (rep.rows.empty()) return;
    const Row& last = rep.rows.back();
    Verdict v{name, false, ""};
    if (last.predicted == 0) {
        v.pass = last.empirical == 0;
        v.detail = "predicted 0, empirical " + fmt(last.empirical);
    } else {
        v.pass = last.ratio >= cfg.tol.window_lo && last.ratio <= cfg.tol.window_hi;
        v.detail = "ratio " + fmt(last.ratio) + " at B=" + fmt(last.B) + " in [" + fmt(cfg.tol.window_lo) + ", " +
                   fmt(cfg.tol.window_hi) + "]";
    }
    rep.verdicts.push_back(v);
}

struct Setup {
    QuadraticForm F;
    expsums::CongruenceData cong;
    Vec4 g;
    lattice::EnumOptions opt;
};

Setup setup(const ExperimentConfig& cfg) {
    Setup s;
    s.F = quadform::from_upper_triangle(cfg.form);
    s.cong = expsums::make_congruence(s.F, cfg.L, cfg.Gamma);
    s.g = quadform::find_point_and_tangent(s.F, 50).g;
    s.opt.threads = cfg.threads;
    return s;
}

void add_measure_constants(Report& rep, const localdens::DensityReport& m) {
    rep.constants.push_back({"series_W", m.series_W});
    rep.constants.push_back({"omega_f", m.omega_f});
    rep.constants.push_back({"tamagawa_V", m.tamagawa_V});
    rep.constants.push_back({"truncation_prime", (double)m.truncation_prime});
    rep.constants.push_back({"tail_bound", m.tail_bound});
    for (auto& [k, v] : m.l_values)
        rep.constants.push_back({k, v});
}

Report run_hlwo(const ExperimentConfig& cfg) {
    auto S = setup(cfg);
    Report rep;
    rep.experiment = cfg.name;
    auto m = localdens::measures(S.F, S.cong, cfg.tol.series, cfg.p_max);
    add_measure_constants(rep, m);
    // predicted constant Σ_c ℐ(w|c)·Ξ_c·ω_f
    double lead = 0, xi_tot = 0;
    for (int c : weight_components(S.F, cfg.weight)) {
        auto I = singint::leray_surface(S.F, on_component(cfg.weight, c), cfg.tol.leray_grid);
        double xi = xi_value(S.F, S.g, S.cong, c);
        rep.constants.push_back({"I_c" + std::to_string(c), I.value});
        rep.constants.push_back({"I_err_c" + std::to_string(c), I.est_error});
        rep.constants.push_back({"xi_c" + std::to_string(c), xi});
        lead += I.value * xi * m.omega_f;
        xi_tot += xi;
    }
    auto w = cfg.weight.make();
    for (double B : cfg.B_schedule) {
        auto t0 = Clock::now();
        auto r = lattice::count_Wo(S.F, w, B, S.cong, lattice::WoMode::direct, S.opt);
        rep.rows.push_back(
            make_row("hlwo", B, cfg.L, 1, 1, r.weighted_sum, lead * B * B, xi_tot, cfg.timing ? ms_since(t0) : 0));
    }
    window_verdict(rep, cfg, "leading-constant");
    if (rep.rows.size() >= 2 && lead != 0) {
        double first = std::abs(rep.rows.front().ratio - 1), last = std::abs(rep.rows.back().ratio - 1);
        rep.verdicts.push_back({"improves-with-B", last <= first, "|ratio-1| " + fmt(first) + " -> " + fmt(last)});
    }
    return rep;
}

Report run_tamagawa(const ExperimentConfig& cfg) {
    auto S = setup(cfg);
    Report rep;
    rep.experiment = cfg.name;
    auto m = localdens::measures(S.F, S.cong, cfg.tol.series, cfg.p_max);
    add_measure_constants(rep, m);
    auto w = cfg.weight.make();
    auto I = singint::leray_surface(S.F, w, cfg.tol.leray_grid);
    rep.constants.push_back({"I", I.value});
    rep.constants.push_back({"I_err", I.est_error});
    const double lead = 0.5 * I.value * m.tamagawa_V;
    for (double B : cfg.B_schedule) {
        auto t0 = Clock::now();
        auto r = lattice::count_V(S.F, w, B, S.cong, S.opt);
        rep.rows.push_back(
            make_row("tamagawa", B, cfg.L, 1, 1, r.weighted_sum, lead * B * B, 1, cfg.timing ? ms_since(t0) : 0));
    }
    window_verdict(rep, cfg, "tamagawa-constant");
    return rep;
}

Report run_bias(const ExperimentConfig& cfg) {
    auto S = setup(cfg);
    Report rep;
    rep.experiment = cfg.name;
    const i64 g0 = first_nonresidue_unit(S.F, cfg.L);
    if (g0 == 0) throw ConfigError("config.L: no unit with psi_F = -1 modulo L, so there is no bias to measure");
    auto m = localdens::measures(S.F, S.cong, cfg.tol.series, cfg.p_max);
    add_measure_constants(rep, m);
    const double r = m.l_values.at("L(2,psi_F chi0[L])") / m.l_values.at("L(2,chi0[L])");
    rep.constants.push_back({"r", r});
    auto w = cfg.weight.make();
    // 𝒩_𝒲(γΓ) ≈ B²Σ_c (ℐ_c𝔖̃ + 𝒦_c(γΓ))
    std::vector<std::pair<int, double>> Ic;
    for (int c : weight_components(S.F, cfg.weight)) {
        double I = singint::leray_surface(S.F, on_component(cfg.weight, c), cfg.tol.leray_grid).value;
        rep.constants.push_back({"I_c" + std::to_string(c), I});
        Ic.push_back({c, I});
    }
    auto lead = [&](const expsums::CongruenceData& cd) {
        double s = 0;
        for (auto [c, I] : Ic)
            s += I * m.series_W + localdens::K_closed(S.F, cd, c, I, cfg.tol.series);
        return s;
    };
    auto tw = expsums::twist(S.F, S.cong, g0);
    const double lead1 = lead(S.cong), lead2 = lead(tw);
    double xi1 = 0, xi2 = 0;
    for (auto [c, I] : Ic) {
        xi1 += xi_value(S.F, S.g, S.cong, c);
        xi2 += xi_value(S.F, S.g, tw, c);
    }
    for (double B : cfg.B_schedule) {
        auto t0 = Clock::now();
        auto a = lattice::count_W(S.F, w, B, S.cong, S.opt);
        auto b = lattice::count_W(S.F, w, B, tw, S.opt);
        double ms = cfg.timing ? ms_since(t0) : 0;
        rep.rows.push_back(make_row("bias", B, cfg.L, 1, 1, a.weighted_sum, lead1 * B * B, xi1, ms));
        rep.rows.push_back(make_row("bias", B, cfg.L, g0, -1, b.weighted_sum, lead2 * B * B, xi2, ms));
        double er = b.weighted_sum != 0 ? a.weighted_sum / b.weighted_sum : NAN;
        rep.rows.push_back(make_row("bias-ratio", B, cfg.L, g0, -1, er, lead2 != 0 ? lead1 / lead2 : 0, 0, ms));
    }
    const Row& last = rep.rows.back();
    rep.verdicts.push_back({"class-ratio", std::isfinite(last.ratio) && std::abs(last.ratio - 1) <= cfg.tol.bias_rel,
                            "empirical " + fmt(last.empirical) + " vs predicted " + fmt(last.predicted)});
    return rep;
}

Report run_scan(const ExperimentConfig& cfg) {
    auto S = setup(cfg);
    Report rep;
    rep.experiment = cfg.name;
    auto m = localdens::measures(S.F, S.cong, cfg.tol.series, cfg.p_max);
    add_measure_constants(rep, m);
    const int comp = cfg.weight.component >= 0 ? cfg.weight.component : 0;
    if (cfg.weight.component < 0 && n_components(S.F) == 2)
        throw ConfigError("config.weight.component: obstruction-scan needs a real component on this form");
    auto w = cfg.weight.make();
    auto I = singint::leray_surface(S.F, w, cfg.tol.leray_grid);
    rep.constants.push_back({"I", I.value});
    const double B = cfg.B_schedule.back();
    bool all_ok = true;
    for (i64 g = 1; g < std::max<i64>(cfg.L, 2); ++g) {
        if (std::gcd(g, cfg.L) != 1) continue;
        auto t0 = Clock::now();
        auto cd = expsums::twist(S.F, S.cong, g);
        double xi = xi_value(S.F, S.g, cd, comp);
        auto r = lattice::count_Wo(S.F, w, B, cd, lattice::WoMode::direct, S.opt);
        double pred = I.value * xi * m.omega_f * B * B;
        rep.rows.push_back(make_row("obstruction-scan", B, cfg.L, g, quadform::psi_F(S.F, g), (double)r.raw_count, pred,
                                    xi, cfg.timing ? ms_since(t0) : 0));
        bool ok = (xi == 0) == (r.raw_count == 0);
        all_ok = all_ok && ok;
    }
    rep.verdicts.push_back({"empty-iff-obstructed", all_ok, "rows with xi = 0 have no points and conversely"});
    return rep;
}

Report run_identities(const ExperimentConfig& cfg) {
    Report rep;
    rep.experiment = cfg.name;
    FormList forms{quadform::from_upper_triangle(cfg.form)};
    for (auto& s : run_identity_suites(forms, cfg.seed)) {
        rep.rows.push_back(
            make_row("identities:" + s.name, 0, cfg.L, 1, 1, (double)s.failed, 0, 0, cfg.timing ? s.runtime_ms : 0));
        rep.verdicts.push_back({s.name, s.passed(),
                                std::to_string(s.checked) + " checked, " + std::to_string(s.failed) + " failed" +
                                    (s.first_failure.empty() ? "" : "; first: " + s.first_failure)});
    }
    return rep;
}

}  // namespace

std::string kind_name(Kind k) {
    switch (k) {
        case Kind::hlwo:
            return "hlwo";
        case Kind::tamagawa:
            return "tamagawa";
        case Kind::bias:
            return "bias";
        case Kind::obstruction_scan:
            return "obstruction-scan";
        case Kind::identities:
            return "identities";
    }
    return "?";
}

Kind parse_kind(const std::string& s) {
    for (Kind k : {Kind::hlwo, Kind::tamagawa, Kind::bias, Kind::obstruction_scan, Kind::identities})
        if (kind_name(k) == s) return k;
    fail("kind", "unknown experiment kind '" + s + "'");
}

lattice::WeightFunction WeightSpec::make() const {
    try {
        if (kind == "bump") return lattice::WeightFunction::bump(center, radius, component, symmetric);
        if (kind == "box") return lattice::WeightFunction::box(lo, hi, component, symmetric);
    } catch (const std::invalid_argument& e) {
        fail("weight", e.what());
    }
    fail("weight.kind", "expected 'bump' or 'box'");
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    check_keys(j, "",
               {"name", "kind", "form", "L", "Gamma", "B_schedule", "weight", "tolerances", "p_max", "seed", "threads",
                "timing"});
    ExperimentConfig c;
    if (j.contains("name")) c.name = get<std::string>(j["name"], "name");
    if (!j.contains("kind")) fail("kind", "missing");
    c.kind = parse_kind(get<std::string>(j["kind"], "kind"));
    if (!j.contains("form")) fail("form", "missing");
    if (!j["form"].is_array() || j["form"].size() != 10) fail("form", "expected the 10 upper-triangle Gram entries");
    for (int i = 0; i < 10; ++i) {
        if (!j["form"][i].is_number_integer()) fail("form[" + std::to_string(i) + "]", "expected an integer");
        c.form[i] = j["form"][i].get<i64>();
    }
    if (j.contains("L")) {
        if (!j["L"].is_number_integer()) fail("L", "expected an integer");
        c.L = j["L"].get<i64>();
    }
    if (j.contains("Gamma")) c.Gamma = vec4(j["Gamma"], "Gamma");
    if (j.contains("B_schedule")) {
        if (!j["B_schedule"].is_array() || j["B_schedule"].empty()) fail("B_schedule", "expected a non-empty array");
        c.B_schedule.clear();
        for (size_t i = 0; i < j["B_schedule"].size(); ++i)
            c.B_schedule.push_back(get<double>(j["B_schedule"][i], "B_schedule[" + std::to_string(i) + "]"));
    }
    if (j.contains("weight")) {
        const auto& w = j["weight"];
        check_keys(w, "weight", {"kind", "center", "radius", "lo", "hi", "component", "symmetric"});
        if (w.contains("kind")) c.weight.kind = get<std::string>(w["kind"], "weight.kind");
        if (w.contains("center")) c.weight.center = vec4d(w["center"], "weight.center");
        if (w.contains("radius")) c.weight.radius = get<double>(w["radius"], "weight.radius");
        if (w.contains("lo")) c.weight.lo = vec4d(w["lo"], "weight.lo");
        if (w.contains("hi")) c.weight.hi = vec4d(w["hi"], "weight.hi");
        if (w.contains("component")) c.weight.component = get<int>(w["component"], "weight.component");
        if (w.contains("symmetric")) c.weight.symmetric = get<bool>(w["symmetric"], "weight.symmetric");
    }
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        check_keys(t, "tolerances", {"series", "window", "bias_rel", "leray_grid"});
        if (t.contains("series")) c.tol.series = get<double>(t["series"], "tolerances.series");
        if (t.contains("window")) {
            if (!t["window"].is_array() || t["window"].size() != 2) fail("tolerances.window", "expected [lo, hi]");
            c.tol.window_lo = get<double>(t["window"][0], "tolerances.window[0]");
            c.tol.window_hi = get<double>(t["window"][1], "tolerances.window[1]");
        }
        if (t.contains("bias_rel")) c.tol.bias_rel = get<double>(t["bias_rel"], "tolerances.bias_rel");
        if (t.contains("leray_grid")) c.tol.leray_grid = get<int>(t["leray_grid"], "tolerances.leray_grid");
    }
    if (j.contains("p_max")) c.p_max = get<i64>(j["p_max"], "p_max");
    if (j.contains("seed")) c.seed = get<u64>(j["seed"], "seed");
    if (j.contains("threads")) c.threads = get<int>(j["threads"], "threads");
    if (j.contains("timing")) c.timing = get<bool>(j["timing"], "timing");
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

void validate(const ExperimentConfig& c) {
    QuadraticForm F;
    try {
        F = quadform::from_upper_triangle(c.form);
    } catch (const FormError& e) {
        fail("form", e.what());
    }
    if (c.L < 1) fail("L", "must be at least 1");
    try {
        expsums::make_congruence(F, c.L, c.Gamma);
    } catch (const std::exception& e) {
        fail("Gamma", e.what());
    }
    for (size_t i = 0; i < c.B_schedule.size(); ++i) {
        if (!(c.B_schedule[i] >= 1)) fail("B_schedule[" + std::to_string(i) + "]", "must be at least 1");
        if (i && c.B_schedule[i] <= c.B_schedule[i - 1]) fail("B_schedule", "must be strictly increasing");
    }
    if (c.weight.component < -1 || c.weight.component >= F.components.count)
        fail("weight.component", "must be -1 or a real component index below " + std::to_string(F.components.count));
    c.weight.make();
    if (c.kind == Kind::tamagawa && !c.weight.symmetric) fail("weight.symmetric", "tamagawa needs a symmetric weight");
    if ((c.kind == Kind::hlwo || c.kind == Kind::bias || c.kind == Kind::obstruction_scan) && c.weight.symmetric)
        fail("weight.symmetric", kind_name(c.kind) + " needs a weight on one sheet");
    if (!(c.tol.series > 0)) fail("tolerances.series", "must be positive");
    if (!(c.tol.window_lo < c.tol.window_hi)) fail("tolerances.window", "lo must be below hi");
    if (!(c.tol.bias_rel > 0)) fail("tolerances.bias_rel", "must be positive");
    if (c.tol.leray_grid < 4 || c.tol.leray_grid % 2) fail("tolerances.leray_grid", "must be even and at least 4");
    if (c.p_max < 100) fail("p_max", "must be at least 100");
    if (c.threads < 1) fail("threads", "must be at least 1");
}

bool Report::passed() const {
    for (auto& v : verdicts)
        if (!v.pass) return false;
    return true;
}

Report run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    switch (cfg.kind) {
        case Kind::hlwo:
            return run_hlwo(cfg);
        case Kind::tamagawa:
            return run_tamagawa(cfg);
        case Kind::bias:
            return run_bias(cfg);
        case Kind::obstruction_scan:
            return run_scan(cfg);
        case Kind::identities:
            return run_identities(cfg);
    }
    throw std::logic_error("run_experiment: unknown kind");
}

Report predict_constants(const ExperimentConfig& cfg) {
    validate(cfg);
    auto S = setup(cfg);
    Report rep;
    rep.experiment = cfg.name;
    auto m = localdens::measures(S.F, S.cong, cfg.tol.series, cfg.p_max);
    add_measure_constants(rep, m);
    rep.constants.push_back({"r", m.l_values.at("L(2,psi_F chi0[L])") / m.l_values.at("L(2,chi0[L])")});
    for (int c : weight_components(S.F, cfg.weight)) {
        auto I = singint::leray_surface(S.F, on_component(cfg.weight, c), cfg.tol.leray_grid);
        rep.constants.push_back({"I_c" + std::to_string(c), I.value});
        rep.constants.push_back({"I_err_c" + std::to_string(c), I.est_error});
        rep.constants.push_back({"xi_c" + std::to_string(c), xi_value(S.F, S.g, S.cong, c)});
    }
    return rep;
}

Report run_count(const ExperimentConfig& cfg, lattice::CountResult::Mode mode, const std::string& dump_path) {
    validate(cfg);
    auto S = setup(cfg);
    S.opt.dump_path = dump_path;
    Report rep;
    rep.experiment = cfg.name;
    const double B = cfg.B_schedule.back();
    auto w = cfg.weight.make();
    auto t0 = Clock::now();
    lattice::CountResult r;
    std::string what;
    switch (mode) {
        case lattice::CountResult::Mode::W:
            r = lattice::count_W(S.F, w, B, S.cong, S.opt);
            what = "count-W";
            break;
        case lattice::CountResult::Mode::Wo:
            r = lattice::count_Wo(S.F, w, B, S.cong, lattice::WoMode::direct, S.opt);
            what = "count-Wo";
            break;
        case lattice::CountResult::Mode::V:
            if (!cfg.weight.symmetric) fail("weight.symmetric", "counting on V needs a symmetric weight");
            r = lattice::count_V(S.F, w, B, S.cong, S.opt);
            what = "count-V";
            break;
    }
    rep.rows.push_back(make_row(what, B, cfg.L, 1, 1, r.weighted_sum, 0, 0, cfg.timing ? ms_since(t0) : 0));
    rep.constants.push_back({"raw_count", (double)r.raw_count});
    return rep;
}

std::string to_csv(const Report& r) {
    std::string s = "experiment,B,L,gamma,psi,empirical,predicted,ratio,xi,runtime_ms\n";
    for (auto& row : r.rows)
        s += row.experiment + "," + fmt(row.B) + "," + std::to_string(row.L) + "," + std::to_string(row.gamma) + "," +
             std::to_string(row.psi) + "," + fmt(row.empirical) + "," + fmt(row.predicted) + "," + fmt(row.ratio) +
             "," + fmt(row.xi) + "," + fmt(row.runtime_ms) + "\n";
    return s;
}

std::string to_json(const Report& r) {
    json j;
    j["experiment"] = r.experiment;
    j["rows"] = json::array();
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    for (auto& row : r.rows)
        j["rows"].push_back({{"experiment", row.experiment},
                             {"B", row.B},
                             {"L", row.L},
                             {"gamma", row.gamma},
                             {"psi", row.psi},
                             {"empirical", num(row.empirical)},
                             {"predicted", num(row.predicted)},
                             {"ratio", num(row.ratio)},
                             {"xi", row.xi},
                             {"runtime_ms", row.runtime_ms}});
    j["constants"] = json::object();
    for (auto& [k, v] : r.constants)
        j["constants"][k] = num(v);
    j["verdicts"] = json::array();
    for (auto& v : r.verdicts)
        j["verdicts"].push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
    j["passed"] = r.passed();
    return j.dump(2) + "\n";
}

void save_report(const Report& r, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    f << (is_json ? to_json(r) : to_csv(r));
}

double xi_value(const QuadraticForm& F, const Vec4& g, const expsums::CongruenceData& cong, int component) {
    try {
        return brauer::xi_density(F, g, cong, component);
    } catch (const brauer::NotLocallyConstantError&) {
    }
    // refine to a modulus where the invariant is constant on classes
    for (i64 Lr = std::lcm(cong.L, F.conductor); Lr <= 64 * std::lcm(cong.L, F.conductor); Lr *= 2) {
        try {
            double num = 0, den = 0;
            for (auto& h : expsums::cone_classes(F, Lr)) {
                bool over = true;
                for (int i = 0; i < 4; ++i)
                    over = over && arith::mod(h[i] - cong.Gamma[i], cong.L) == 0;
                if (!over) continue;
                auto cd = expsums::make_congruence(F, Lr, h);
                if (!localdens::locally_soluble(F, cd)) continue;
                double w = localdens::omega_f_union(F, Lr, {h});
                num += w * brauer::xi_density(F, g, cd, component);
                den += w;
            }
            if (den == 0) throw localdens::InsolubleError("xi_value: the class has no local points");
            return num / den;
        } catch (const brauer::NotLocallyConstantError&) {
        }
    }
    throw brauer::NotLocallyConstantError("xi_value: no refinement makes the invariant constant");
}

// ---------------------------------------------------------------------------
// exact-identity suites

namespace {

struct Tally {
    SuiteResult r;
    Clock::time_point t0 = Clock::now();
    explicit Tally(std::string name) { r.name = std::move(name); }
    // what() builds the description, only on failure
    template <class Fn>
    void check(bool ok, Fn&& what) {
        ++r.checked;
        if (!ok) {
            ++r.failed;
            if (r.first_failure.empty()) r.first_failure = what();
        }
    }
    SuiteResult done() {
        r.runtime_ms = ms_since(t0);
        return r;
    }
};

std::string vs(const Vec4& v) {
    return "(" + std::to_string(v[0]) + "," + std::to_string(v[1]) + "," + std::to_string(v[2]) + "," +
           std::to_string(v[3]) + ")";
}

std::string form_tag(const QuadraticForm& F) { return quadform::to_string(F); }

// z² = ax² + by² has a primitive solution mod p^K
bool soluble_mod(i64 a, i64 b, i64 p, int K) {
    const i64 q = arith::ipow(p, K);
    std::vector<char> sq(q, 0), unit_sq(q, 0);
    for (i64 z = 0; z < q; ++z) {
        sq[z * z % q] = 1;
        if (z % p) unit_sq[z * z % q] = 1;
    }
    a = arith::mod(a, q);
    b = arith::mod(b, q);
    for (i64 x = 0; x < q; ++x)
        for (i64 y = 0; y < q; ++y) {
            i64 t = (a * x % q * x + b * y % q * y) % q;
            bool prim_xy = x % p || y % p;
            if (prim_xy ? sq[t] : unit_sq[t]) return true;
        }
    return false;
}

}  // namespace

SuiteResult suite_multiplicativity(const FormList& forms, int q_max, int R) {
    Tally t("multiplicativity");
    expsums::CBox box{R};
    for (auto& F : forms) {
        std::vector<std::vector<expsums::ExpSumValue>> S(q_max + 1);
        for (i64 q = 1; q <= q_max; ++q)
            S[q] = expsums::S_q_plain_box(F, q, box);
        for (i64 q1 = 2; q1 <= q_max; ++q1)
            for (i64 q2 = q1 + 1; q1 * q2 <= q_max; ++q2) {
                if (std::gcd(q1, q2) != 1) continue;
                for (size_t i = 0; i < box.size(); ++i) {
                    auto a = S[q1][i].integer(), b = S[q2][i].integer(), ab = S[q1 * q2][i].integer();
                    t.check(a && b && ab && *ab == *a * *b, [&] {
                        return form_tag(F) + " q=" + std::to_string(q1) + "*" + std::to_string(q2) +
                               " c=" + vs(box.at(i));
                    });
                }
            }
    }
    return t.done();
}

SuiteResult suite_reconstruction(const FormList& forms, int q_max, int L_max, int R) {
    Tally t("reconstruction");
    expsums::CBox box{R};
    for (auto& F : forms)
        for (i64 L = 1; L <= L_max; ++L)
            for (auto& G : expsums::cone_classes(F, L)) {
                auto cd = expsums::make_congruence(F, L, G);
                for (i64 q = 1; q <= q_max; ++q) {
                    auto d = expsums::qdecomp(F, cd, q);
                    auto lhs = expsums::S_full_box(F, cd, q, box, expsums::Mode::brute);
                    auto sc = expsums::script_S_box(F, cd, d.q2, arith::mod(d.q1, L), box);
                    for (size_t i = 0; i < box.size(); ++i) {
                        Vec4 c = box.at(i);
                        expsums::ExpSumValue rhs{sc[i].value.scaled(expsums::R_sum(F, d.q1, c)), 1};
                        t.check(lhs[i] == rhs, [&] {
                            return form_tag(F) + " L=" + std::to_string(L) + " G=" + vs(G) + " q=" + std::to_string(q) +
                                   " c=" + vs(c);
                        });
                    }
                }
            }
    return t.done();
}

SuiteResult suite_closed_forms(const FormList& forms, int q_max) {
    Tally t("closed-forms");
    const expsums::CBox box{2};
    for (auto& F : forms) {
        std::vector<Vec4> iso;
        for (size_t i = 0; i < box.size(); ++i)
            if (F.adjoint_value(box.at(i)) == 0) iso.push_back(box.at(i));
        for (i64 q = 1; q <= q_max; ++q) {
            if (std::gcd(q, 2 * F.disc) != 1) continue;
            auto mpt = arith::mu_phi_theta1((u64)q);
            const int psi = quadform::psi_F(F, q);
            auto s0 = expsums::S_q_plain(F, q, {0, 0, 0, 0}).integer();
            t.check(s0 && *s0 * mpt.theta1.denominator() == q * q * q * psi * mpt.theta1.numerator(),
                    [&] { return form_tag(F) + " S_q(0) q=" + std::to_string(q); });
            const i64 phi3 = (i64)arith::euler_phi((u64)(q * q * q));
            for (auto& c : iso)
                t.check(expsums::R_sum(F, q, c) == phi3 * psi,
                        [&] { return form_tag(F) + " R q=" + std::to_string(q) + " c=" + vs(c); });
        }
    }
    return t.done();
}

SuiteResult suite_character_flip(const FormList& forms, int trials, u64 seed) {
    Tally t("character-flip");
    std::mt19937_64 rng(seed);
    const std::vector<i64> Ls{2, 3, 4, 6, 8, 12};
    const expsums::Limits lim;
    int done = 0, guard = 0;
    while (done < trials && guard++ < 100 * trials) {
        const auto& F = forms[rng() % forms.size()];
        const i64 L = Ls[rng() % Ls.size()];
        auto cls = expsums::cone_classes(F, L);
        if (cls.empty()) continue;
        auto base = expsums::make_congruence(F, L, cls[rng() % cls.size()]);
        // q₂ built from primes dividing 2ΔL, inside the brute range
        std::vector<i64> q2s;
        for (i64 q2 = 1; q2 * L * L <= lim.q2L2_max; ++q2) {
            i64 r = q2;
            for (u64 p : arith::factorize((u64)(2 * std::abs(F.disc) * L)).primes())
                while (r % (i64)p == 0)
                    r /= (i64)p;
            if (r == 1) q2s.push_back(q2);
        }
        const i64 q2 = q2s[rng() % q2s.size()];
        i64 d = 0;
        while (d == 0 || std::gcd(d, L) != 1)
            d = 1 + (i64)(rng() % (u64)L);
        auto chars = arith::real_characters(L);
        const auto& chi = chars[rng() % chars.size()];
        Vec4 c;
        for (auto& v : c)
            v = (i64)(rng() % 5) - 2;
        auto a = expsums::A_char(F, base, q2, chi, c);
        auto b = expsums::A_char(F, expsums::twist(F, base, d), q2, chi, c);
        t.check(b == expsums::ExpSumValue{a.value.scaled(chi(d)), a.denominator}, [&] {
            return form_tag(F) + " L=" + std::to_string(L) + " q2=" + std::to_string(q2) + " d=" + std::to_string(d) +
                   " c=" + vs(c);
        });
        ++done;
    }
    return t.done();
}

SuiteResult suite_B_flip(const FormList& forms, double rel) {
    Tally t("B-flip");
    const expsums::Limits lim;
    for (auto& F : forms) {
        const i64 L = F.conductor;
        const i64 u_max = std::max<i64>(1, lim.q2L2_max / (L * L));
        auto cls = expsums::cone_classes(F, L);
        expsums::CBox box{2};
        std::vector<Vec4> cs;
        for (size_t i = 0; i < box.size(); ++i)
            if (F.adjoint_value(box.at(i)) == 0) cs.push_back(box.at(i));
        cs.push_back({1, 1, 0, 0});
        for (size_t k = 0; k < cls.size() && k < 2; ++k) {
            auto base = expsums::make_congruence(F, L, cls[k]);
            for (i64 d = 2; d < L; ++d) {
                if (std::gcd(d, L) != 1) continue;
                auto tw = expsums::twist(F, base, d);
                for (auto& c : cs) {
                    auto b0 = expsums::B_coeff_truncated(F, base, c, u_max);
                    auto b1 = expsums::B_coeff_truncated(F, tw, c, u_max);
                    double err = std::abs(b1.value - (double)quadform::psi_F(F, d) * b0.value);
                    t.check(err <= rel * std::max(std::abs(b0.value), 1.0),
                            [&] { return form_tag(F) + " d=" + std::to_string(d) + " c=" + vs(c); });
                }
            }
        }
    }
    return t.done();
}

SuiteResult suite_reciprocity(int pairs, u64 seed) {
    Tally t("hilbert-reciprocity");
    std::mt19937_64 rng(seed);
    auto rnd = [&] {
        i64 v = 0;
        while (v == 0)
            v = (i64)(rng() % 20001) - 10000;
        return v;
    };
    for (int k = 0; k < pairs; ++k) {
        i64 a = rnd(), b = rnd();
        Rational sum = brauer::invariant_of_symbol(brauer::hilbert_symbol(a, b, brauer::Place::infinity()));
        for (u64 p : arith::factorize((u64)(2 * std::abs(a) * std::abs(b))).primes())
            sum += brauer::invariant_of_symbol(brauer::hilbert_symbol(a, b, brauer::Place::prime(p)));
        t.check(sum.denominator() == 1, [&] { return "a=" + std::to_string(a) + " b=" + std::to_string(b); });
    }
    return t.done();
}

SuiteResult suite_symbol_solubility(int pairs, u64 seed) {
    Tally t("symbol-solubility");
    std::mt19937_64 rng(seed);
    const std::vector<i64> ps{2, 3, 5, 7, 11, 13};
    for (int k = 0; k < pairs; ++k) {
        const i64 p = ps[k % ps.size()];
        i64 a = 0, b = 0;
        while (!a)
            a = (i64)(rng() % 201) - 100;
        while (!b)
            b = (i64)(rng() % 201) - 100;
        while (a % (p * p) == 0)
            a /= p * p;
        while (b % (p * p) == 0)
            b /= p * p;
        const int K = p == 2 ? 5 : 3;
        bool sol = soluble_mod(a, b, p, K);
        t.check((brauer::hilbert_symbol(a, b, brauer::Place::prime((u64)p)) == 1) == sol,
                [&] { return "p=" + std::to_string(p) + " a=" + std::to_string(a) + " b=" + std::to_string(b); });
    }
    return t.done();
}

SuiteResult suite_local_densities(const FormList& forms, const std::vector<i64>& Ls) {
    Tally t("local-densities");
    for (auto& F : forms)
        for (i64 L : Ls) {
            auto cls = expsums::cone_classes(F, L);
            for (size_t i = 0; i < cls.size(); i += std::max<size_t>(1, cls.size() / 4)) {
                auto cd = expsums::make_congruence(F, L, cls[i]);
                for (u64 p : {2, 3, 5, 7, 11, 13}) {
                    const std::string tag =
                        form_tag(F) + " L=" + std::to_string(L) + " G=" + vs(cls[i]) + " p=" + std::to_string(p);
                    localdens::LocalDensity sp;
                    try {
                        sp = localdens::sigma_p(F, p, cd, 10, true);
                    } catch (const localdens::NotStabilizedError&) {
                        t.check(false, [&] { return tag + " did not stabilize"; });
                        continue;
                    }
                    const int k = sp.stabilized_at;
                    const i64 a = localdens::primitive_count(F, p, cd, k),
                              b = localdens::primitive_count(F, p, cd, k + 1);
                    t.check(Rational(a, arith::ipow((i64)p, 3 * k)) == Rational(b, arith::ipow((i64)p, 3 * k + 3)),
                            [&] { return tag + " unstable"; });
                    if ((2 * F.disc * L) % (i64)p != 0)
                        t.check(sp.value == localdens::sigma_p_good(F, p), [&] { return tag; });
                }
            }
        }
    return t.done();
}

SuiteResult suite_measure_coherence(const FormList& forms, double tol) {
    Tally t("measure-coherence");
    for (auto& F : forms)
        for (i64 L : {1, 2, 4, 3}) {
            for (auto& g : expsums::cone_classes(F, L)) {
                const std::string tag = form_tag(F) + " L=" + std::to_string(L) + " G=" + vs(g);
                double coarse = localdens::omega_f_union(F, L, {g}, tol);
                std::vector<Vec4> lifts;
                for (auto& h : expsums::cone_classes(F, 2 * L)) {
                    bool ok = true;
                    for (int i = 0; i < 4; ++i)
                        ok = ok && arith::mod(h[i] - g[i], L) == 0;
                    if (ok) lifts.push_back(h);
                }
                double fine = localdens::omega_f_union(F, 2 * L, lifts, tol);
                t.check(std::abs(fine - coarse) <= 3 * tol * std::max(coarse, 1e-300) || (coarse == 0 && fine == 0),
                        [&] { return tag + " additivity"; });
                auto cd = expsums::make_congruence(F, L, g);
                if (!localdens::locally_soluble(F, cd)) continue;
                auto m = localdens::measures(F, cd, tol);
                std::vector<Vec4> orbit;
                for (i64 d = 1; d <= L; ++d)
                    if (std::gcd(d, L) == 1) orbit.push_back(expsums::twist(F, cd, d).Gamma);
                double per_class = localdens::omega_f_union(F, L, orbit, tol);
                t.check(m.tamagawa_V == (double)arith::euler_phi((u64)L) * m.omega_f,
                        [&] { return tag + " tamagawa definition"; });
                t.check(std::abs(per_class - m.tamagawa_V) <= 3 * tol * m.tamagawa_V,
                        [&] { return tag + " tamagawa per class"; });
            }
        }
    return t.done();
}

std::vector<SuiteResult> run_identity_suites(const FormList& forms, u64 seed) {
    std::vector<SuiteResult> out;
    out.push_back(suite_multiplicativity(forms));
    out.push_back(suite_reconstruction(forms));
    out.push_back(suite_closed_forms(forms));
    out.push_back(suite_character_flip(forms, 100, seed));
    out.push_back(suite_B_flip(forms));
    out.push_back(suite_reciprocity(500, seed));
    out.push_back(suite_symbol_solubility(100, seed));
    out.push_back(suite_local_densities(forms));
    out.push_back(suite_measure_coherence(forms));
    return out;
}

}  // namespace quadcone::harness
