#pragma once

// Experiment configuration, orchestration and reports, plus the exact-identity
// suites shared by the CLI and the acceptance run.

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "quadcone/brauer.hpp"
#include "quadcone/lattice.hpp"
#include "quadcone/localdens.hpp"
#include "quadcone/singint.hpp"

namespace quadcone::harness {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Kind { hlwo, tamagawa, bias, obstruction_scan, identities };
std::string kind_name(Kind k);
Kind parse_kind(const std::string& s);

struct WeightSpec {
    std::string kind = "bump";  // bump | box
    Vec4d center{0, 0, 0, 1};
    double radius = 0.9;
    Vec4d lo{0, 0, 0, 0}, hi{0, 0, 0, 0};
    int component = -1;
    bool symmetric = false;

    lattice::WeightFunction make() const;
};

struct Tolerances {
    double series = 1e-6;
    double window_lo = 0.85, window_hi = 1.15;
    double bias_rel = 0.2;
    int leray_grid = 64;
};

struct ExperimentConfig {
    std::string name = "experiment";
    Kind kind = Kind::hlwo;
    std::array<i64, 10> form{1, 0, 0, 0, 1, 0, 0, 1, 0, -1};
    i64 L = 1;
    Vec4 Gamma{0, 0, 0, 0};
    std::vector<double> B_schedule{100};
    WeightSpec weight;
    Tolerances tol;
    i64 p_max = 10000;
    u64 seed = 1;
    int threads = 1;
    bool timing = false;  // runtime_ms stays 0 otherwise, keeping reports reproducible
};

/// Throws ConfigError naming the offending field.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
void validate(const ExperimentConfig& cfg);

struct Row {
    std::string experiment;
    double B = 0;
    i64 L = 1;
    i64 gamma = 1;
    int psi = 1;
    double empirical = 0;
    double predicted = 0;
    double ratio = 0;  // empirical/predicted, or empirical itself when predicted = 0
    double xi = 0;
    double runtime_ms = 0;
};

struct Verdict {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct Report {
    std::string experiment;
    std::vector<Row> rows;
    std::vector<std::pair<std::string, double>> constants;
    std::vector<Verdict> verdicts;
    bool passed() const;
};

Report run_experiment(const ExperimentConfig& cfg);
/// constants block only: measures, L-values, ℐ and Ξ per component, r
Report predict_constants(const ExperimentConfig& cfg);
/// one counting call at the largest B of the schedule
Report run_count(const ExperimentConfig& cfg, lattice::CountResult::Mode mode, const std::string& dump_path = "");

std::string to_csv(const Report& r);
std::string to_json(const Report& r);
/// CSV or JSON by extension
void save_report(const Report& r, const std::string& path);

/// Ξ for the class on a component; when the invariant is not constant on the
/// class, the ω_f-weighted average over its lifts to lcm(L, ε).
double xi_value(const quadform::QuadraticForm& F, const Vec4& g, const expsums::CongruenceData& cong, int component);

struct SuiteResult {
    std::string name;
    i64 checked = 0;
    i64 failed = 0;
    std::string first_failure;
    double runtime_ms = 0;
    bool passed() const { return checked > 0 && failed == 0; }
};

using FormList = std::vector<quadform::QuadraticForm>;

/// S_{q₁q₂}(c) = S_{q₁}(c)S_{q₂}(c), coprime q₁, q₂, q₁q₂ ≤ q_max, |c|∞ ≤ R
SuiteResult suite_multiplicativity(const FormList& forms, int q_max = 12, int R = 2);
/// phased S = ℛ(q₁;c)·𝒮(q̄₁;c) for every cone class mod L ≤ L_max and q ≤ q_max
SuiteResult suite_reconstruction(const FormList& forms, int q_max = 12, int L_max = 4, int R = 2);
/// S_q(0) = q³θ₁(q)ψ(q) and ℛ(q;c) = φ(q³)ψ(q) when F*(c) = 0
SuiteResult suite_closed_forms(const FormList& forms, int q_max = 60);
/// 𝒜_{q₂,L,dλ}(χ;c) = χ(d)𝒜_{q₂,L,λ}(χ;c) on random data
SuiteResult suite_character_flip(const FormList& forms, int trials = 100, u64 seed = 1);
/// ℬ_{L,dλ}(c) = ψ(d)ℬ_{L,λ}(c) at matching truncation, relative tolerance
SuiteResult suite_B_flip(const FormList& forms, double rel = 1e-9);
SuiteResult suite_reciprocity(int pairs = 500, u64 seed = 1);
/// (a,b)_p = 1 iff z² = ax² + by² has a primitive solution mod p^K, p ≤ 13
SuiteResult suite_symbol_solubility(int pairs = 100, u64 seed = 1);
/// raw σ_p counts stabilize and equal the closed form at good p ≤ 13
SuiteResult suite_local_densities(const FormList& forms, const std::vector<i64>& Ls = {1, 4, 12});
/// ω_f additivity over L → 2L and tamagawa_V = φ(L)ω_f through the per-class path
SuiteResult suite_measure_coherence(const FormList& forms, double tol = 1e-6);

std::vector<SuiteResult> run_identity_suites(const FormList& forms, u64 seed = 1);

}  // namespace quadcone::harness
