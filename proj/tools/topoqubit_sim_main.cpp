// topoqubit-sim: command-line surface tying the library modules into
// reproducible experiments. Every command reads a JSON config (explicit units
// in key names), runs deterministically (all seeds live in the config),
// prints exactly one [PASS]/[FAIL] summary line against its configured
// thresholds, and writes JSON/CSV artifacts that embed the tool version and
// the FNV-1a hash of the canonically re-serialized config.
//
// Exit codes: 0 pass, 1 threshold fail, 2 invalid config, 3 guard/resource
// violation.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "tqsim/core.hpp"
#include "tqsim/device.hpp"
#include "tqsim/drive.hpp"
#include "tqsim/evolve.hpp"
#include "tqsim/lattice.hpp"
#include "tqsim/schedule.hpp"
#include "tqsim/units.hpp"

namespace {

using Json = nlohmann::ordered_json;
using namespace tqsim;

// ---------------------------------------------------------------------------
// Config access with diagnostics that name the offending key.
// ---------------------------------------------------------------------------

const Json& need(const Json& j, const std::string& key) {
    auto it = j.find(key);
    if (it == j.end())
        throw config_error("config: missing key '" + key + "'");
    return *it;
}

double need_num(const Json& j, const std::string& key) {
    const Json& v = need(j, key);
    if (!v.is_number())
        throw config_error("config: key '" + key + "' must be a number");
    return v.get<double>();
}

long need_int(const Json& j, const std::string& key) {
    const Json& v = need(j, key);
    if (!v.is_number_integer())
        throw config_error("config: key '" + key + "' must be an integer");
    return v.get<long>();
}

std::string need_str(const Json& j, const std::string& key) {
    const Json& v = need(j, key);
    if (!v.is_string())
        throw config_error("config: key '" + key + "' must be a string");
    return v.get<std::string>();
}

double opt_num(const Json& j, const std::string& key, double dflt) {
    return j.contains(key) ? need_num(j, key) : dflt;
}

long opt_int(const Json& j, const std::string& key, long dflt) {
    return j.contains(key) ? need_int(j, key) : dflt;
}

bool opt_bool(const Json& j, const std::string& key, bool dflt) {
    if (!j.contains(key)) return dflt;
    const Json& v = j.at(key);
    if (!v.is_boolean())
        throw config_error("config: key '" + key + "' must be a boolean");
    return v.get<bool>();
}

std::string opt_str(const Json& j, const std::string& key,
                    const std::string& dflt) {
    return j.contains(key) ? need_str(j, key) : dflt;
}

std::vector<long> need_int_list(const Json& j, const std::string& key) {
    const Json& v = need(j, key);
    if (!v.is_array() || v.empty())
        throw config_error("config: key '" + key +
                           "' must be a non-empty array of integers");
    std::vector<long> out;
    for (const Json& e : v) {
        if (!e.is_number_integer())
            throw config_error("config: key '" + key +
                               "' must contain only integers");
        out.push_back(e.get<long>());
    }
    return out;
}

std::vector<double> need_num_list(const Json& j, const std::string& key) {
    const Json& v = need(j, key);
    if (!v.is_array() || v.empty())
        throw config_error("config: key '" + key +
                           "' must be a non-empty array of numbers");
    std::vector<double> out;
    for (const Json& e : v) {
        if (!e.is_number())
            throw config_error("config: key '" + key +
                               "' must contain only numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Files: read whole, write atomically (tmp + rename).
// ---------------------------------------------------------------------------

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void atomic_write(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw config_error("cannot write file: " + tmp);
        out << bytes;
        out.flush();
        if (!out) throw config_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw config_error("cannot rename " + tmp + " to " + path);
}

std::string fmt17(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

std::string fmt4(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.4g", v);
    return b;
}

// ---------------------------------------------------------------------------
// Shared command plumbing.
// ---------------------------------------------------------------------------

struct CommandIO {
    Json config;
    std::string config_hash;  // FNV-1a of the canonical re-serialization
    std::string out_dir;
};

CommandIO load_config(const std::string& config_path,
                      const std::string& out_dir) {
    const std::string bytes = read_file(config_path);
    Json j = Json::parse(bytes, nullptr, false);
    if (j.is_discarded())
        throw config_error("config: not valid JSON: " + config_path);
    if (!j.is_object())
        throw config_error("config: top level must be a JSON object");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw config_error("cannot create output directory: " + out_dir);
    std::string hash = fnv1a64_hex(j.dump(2) + "\n");
    return {std::move(j), std::move(hash), out_dir};
}

Json report_header(const std::string& experiment, const CommandIO& io) {
    Json j;
    j["tool_version"] = tool_version;
    j["config_fnv1a64"] = io.config_hash;
    j["experiment"] = experiment;
    return j;
}

// Writes the report, prints the single summary line, returns the exit code.
int finish(const std::string& name, const CommandIO& io, Json report,
           bool pass, const std::string& summary) {
    report["pass"] = pass;
    report["summary"] = summary;
    atomic_write(io.out_dir + "/" + name + "_report.json",
                 report.dump(2) + "\n");
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << ": " << summary
              << "\n";
    return pass ? 0 : 1;
}

void write_csv(const CommandIO& io, const std::string& name,
               const std::string& header,
               const std::vector<std::string>& rows) {
    std::string csv = "# tool_version=" + std::string(tool_version) +
                      " config_fnv1a64=" + io.config_hash + "\n" + header +
                      "\n";
    for (const std::string& r : rows) csv += r + "\n";
    atomic_write(io.out_dir + "/" + name + ".csv", csv);
}

// Drive block: {g, E_J_rad_per_s, omega_rad_per_s, omega_c_rad_per_s,
// loops_k}. The coupling preset (axis, preset_k) fixes the SQUID flux
// phases; schedule-level commands leave them zero because every slice
// carries its own flux.
DriveParams drive_from_config(const Json& dj, char preset_axis, long preset_k) {
    double pm = 0.0, pp = 0.0;
    if (preset_axis != 0) {
        auto [m, p] = coupling_preset(preset_axis, preset_k);
        pm = m;
        pp = p;
    }
    return DriveParams(need_num(dj, "g"), need_num(dj, "E_J_rad_per_s"),
                       need_num(dj, "omega_rad_per_s"),
                       need_num(dj, "omega_c_rad_per_s"), pm, pp,
                       opt_int(dj, "loops_k", 1));
}

char axis_from_config(const Json& c) {
    const std::string axis = opt_str(c, "axis", "x");
    if (axis != "x" && axis != "y")
        throw config_error("config: key 'axis' must be \"x\" or \"y\"");
    return axis[0];
}

Vec cavity_probe_vec(const Json& pj, long n_max) {
    const std::string kind = need_str(pj, "kind");
    if (kind == "vacuum") return basis_vec(n_max + 1, 0);
    if (kind == "fock") {
        const long n = need_int(pj, "n");
        if (n < 0 || n > n_max)
            throw config_error("config: fock probe key 'n' out of range");
        return basis_vec(n_max + 1, n);
    }
    if (kind == "coherent") {
        const cxd alpha(need_num(pj, "alpha_re"), opt_num(pj, "alpha_im", 0.0));
        return coherent_state(n_max, alpha);
    }
    throw config_error("config: unknown cavity probe kind '" + kind + "'");
}

std::string cavity_probe_name(const Json& pj) {
    const std::string kind = need_str(pj, "kind");
    if (kind == "fock") return "fock:" + std::to_string(need_int(pj, "n"));
    if (kind == "coherent")
        return "coherent:" + fmt4(need_num(pj, "alpha_re")) + "+" +
               fmt4(opt_num(pj, "alpha_im", 0.0)) + "i";
    return kind;
}

// ---------------------------------------------------------------------------
// spectrum: ground degeneracy and gap of the target Hamiltonian, M sweep.
// ---------------------------------------------------------------------------

int cmd_spectrum(const CommandIO& io) {
    const Json& c = io.config;
    const std::vector<long> Ms = need_int_list(c, "M_list");
    const double chi_x = need_num(c, "chi_x_rad_per_s");
    const double chi_y = need_num(c, "chi_y_rad_per_s");
    const double tol = opt_num(c, "degeneracy_tol", 1e-9);
    const long want_deg = opt_int(c, "expected_ground_degeneracy", 2);
    const double min_gap = opt_num(c, "min_gap_rad_per_s", 0.0);

    Json report = report_header("spectrum", io);
    Json runs = Json::array();
    std::vector<std::string> levels;
    bool pass = true;
    std::ostringstream sum;
    for (long M : Ms) {
        const LatticeSpec spec(M, chi_x, chi_y);
        const HilbertSpace space = HilbertSpace::qubits(spec.num_devices());
        const SpectrumReport r = spectrum(target_hamiltonian(spec, space), tol);
        const bool ok = r.ground_degeneracy == want_deg && r.gap > min_gap;
        if (r.gap == 0.0)
            std::cout << "WARNING: M=" << M
                      << ": gap is 0 (the whole spectrum is one degenerate "
                         "multiplet)\n";
        Json run;
        run["M"] = M;
        run["dimension"] = space.total_dim();
        run["ground_energy_rad_per_s"] = r.eigenvalues(0);
        run["ground_degeneracy"] = r.ground_degeneracy;
        run["gap_rad_per_s"] = r.gap;
        run["gap_over_chi_x"] = r.gap / chi_x;
        run["pass"] = ok;
        runs.push_back(run);
        for (long i = 0; i < r.eigenvalues.size(); ++i)
            levels.push_back(std::to_string(M) + "," + std::to_string(i) +
                             "," + fmt17(r.eigenvalues(i)));
        pass = pass && ok;
        sum << "M=" << M << " degeneracy=" << r.ground_degeneracy
            << " gap/chi_x=" << fmt4(r.gap / chi_x) << "  ";
    }
    report["runs"] = runs;
    write_csv(io, "spectrum_levels", "M,level,eigenvalue_rad_per_s", levels);
    return finish("spectrum", io, std::move(report), pass, sum.str());
}

// ---------------------------------------------------------------------------
// gate: integrate the interaction Hamiltonian over closed loops and compare
// against the terminating-Magnus propagator and the boson-independent
// collective-square gate, restricted to cavity-probe injections.
// ---------------------------------------------------------------------------

struct GateRun {
    Json probes = Json::array();
    double worst = 0.0;
    double unitarity_error = 0.0;
    long steps = 0;
};

GateRun run_gate_once(char axis, const DriveParams& d, long loops, long n_max,
                      double tol, const Json& probes_cfg, long num_devices) {
    const HilbertSpace space =
        HilbertSpace::qubits_with_boson(num_devices, n_max);
    std::vector<long> devices(num_devices);
    for (long q = 0; q < num_devices; ++q) devices[q] = q;
    const double t = 2.0 * M_PI * loops / d.delta();

    const InteractionModel model(devices, d, space);
    const Vec psi0 = basis_vec(space.total_dim(), 0);
    const PropagationResult prop =
        propagate(model, space, psi0, 0.0, t, tol, true);
    const Mat& u_num = *prop.unitary;
    const Mat u_magnus =
        closed_form_propagator(axis, devices, d, t, space).m;
    const Mat u_eff = expm_i(
        effective_hamiltonian(axis, devices, d.chi(), space).m, t);

    GateRun out;
    out.unitarity_error = prop.unitarity_error;
    out.steps = prop.steps;
    for (const Json& pj : probes_cfg) {
        const Mat inj = cavity_injection(cavity_probe_vec(pj, n_max), space);
        const double dm = spectral_norm(Mat((u_num - u_magnus) * inj));
        const double de = spectral_norm(Mat((u_num - u_eff) * inj));
        Json row;
        row["probe"] = cavity_probe_name(pj);
        row["distance_to_closed_form"] = dm;
        row["distance_to_effective_gate"] = de;
        out.probes.push_back(row);
        out.worst = std::max(out.worst, std::max(dm, de));
    }
    return out;
}

int cmd_gate(const CommandIO& io) {
    const Json& c = io.config;
    const char axis = axis_from_config(c);
    const DriveParams d =
        drive_from_config(need(c, "drive"), axis, opt_int(c, "preset_k", 1));
    const long num_devices = opt_int(c, "num_devices", 2);
    const long n_max = opt_int(c, "n_max", 15);
    const double tol = opt_num(c, "ode_tol", 1e-10);
    const std::vector<long> loops_list =
        c.contains("loops_k_list") ? need_int_list(c, "loops_k_list")
                                   : std::vector<long>{1, 2};
    const Json& probes_cfg = need(c, "cavity_probes");
    if (!probes_cfg.is_array() || probes_cfg.empty())
        throw config_error(
            "config: key 'cavity_probes' must be a non-empty array");
    const double max_dist = opt_num(c, "max_operator_distance", 1e-6);
    const double max_unit = opt_num(c, "max_unitarity_error", 1e-8);
    const bool converge = opt_bool(c, "convergence_check", true);

    Json report = report_header("gate", io);
    report["chi_rad_per_s"] = d.chi();
    Json runs = Json::array();
    std::vector<std::string> rows;
    bool pass = true;
    double worst = 0.0;
    for (long k : loops_list) {
        const GateRun r =
            run_gate_once(axis, d, k, n_max, tol, probes_cfg, num_devices);
        Json run;
        run["loops_k"] = k;
        run["time_s"] = 2.0 * M_PI * k / d.delta();
        run["n_max"] = n_max;
        run["unitarity_error"] = r.unitarity_error;
        run["accepted_steps"] = r.steps;
        run["probes"] = r.probes;
        run["worst_distance"] = r.worst;
        if (converge) {
            const GateRun r5 = run_gate_once(axis, d, k, n_max + 5, tol,
                                             probes_cfg, num_devices);
            run["worst_distance_at_n_max_plus_5"] = r5.worst;
            run["converged"] = std::abs(r5.worst - r.worst) < 1e-6;
            pass = pass && std::abs(r5.worst - r.worst) < 1e-6;
        }
        runs.push_back(run);
        for (const Json& p : r.probes)
            rows.push_back(std::to_string(k) + "," +
                           p.at("probe").get<std::string>() + "," +
                           fmt17(p.at("distance_to_closed_form")) + "," +
                           fmt17(p.at("distance_to_effective_gate")));
        worst = std::max(worst, r.worst);
        pass = pass && r.worst <= max_dist && r.unitarity_error <= max_unit;
    }
    report["runs"] = runs;
    report["worst_distance"] = worst;
    write_csv(io, "gate_distances",
              "loops_k,cavity_probe,distance_to_closed_form,"
              "distance_to_effective_gate",
              rows);
    return finish("gate", io, std::move(report), pass,
                  "worst operator distance " + fmt4(worst) + " (threshold " +
                      fmt4(max_dist) + ")");
}

// ---------------------------------------------------------------------------
// thermal: worst-case trace distance between the qubit reduced maps for
// vacuum vs thermal cavity preparation, closed loop vs open loop.
// ---------------------------------------------------------------------------

struct ThermalRun {
    double closed_worst = 0.0;
    double open_worst = 0.0;
    Json per_probe = Json::array();
};

ThermalRun run_thermal_once(char axis, const DriveParams& d, long loops,
                            long n_max, double n_bar, double tol,
                            std::uint64_t probe_seed, long num_devices) {
    (void)axis;  // the preset is already folded into the drive phases
    const HilbertSpace space =
        HilbertSpace::qubits_with_boson(num_devices, n_max);
    std::vector<long> devices(num_devices);
    for (long q = 0; q < num_devices; ++q) devices[q] = q;
    const double t_closed = 2.0 * M_PI * loops / d.delta();
    const double t_open = M_PI * loops / d.delta();

    const InteractionModel model(devices, d, space);
    const Vec psi0 = basis_vec(space.total_dim(), 0);
    const Mat u_closed =
        *propagate(model, space, psi0, 0.0, t_closed, tol, true).unitary;
    const Mat u_open =
        *propagate(model, space, psi0, 0.0, t_open, tol, true).unitary;

    std::vector<QuantumState> vac_probes, th_probes;
    const Mat rho_vac = thermal_cavity(n_max, 0.0);
    const Mat rho_th = thermal_cavity(n_max, n_bar);
    for (const Vec& q : probe_qubit_states(num_devices,
                                           static_cast<unsigned>(probe_seed))) {
        vac_probes.push_back(product_with_cavity(q, rho_vac, space));
        th_probes.push_back(product_with_cavity(q, rho_th, space));
    }
    const OperatorMatrix uc(space, u_closed), uo(space, u_open);
    const ChannelComparison closed_cmp =
        compare_channels(uc, uc, vac_probes, th_probes);
    const ChannelComparison open_cmp =
        compare_channels(uo, uo, vac_probes, th_probes);

    ThermalRun out;
    out.closed_worst = closed_cmp.worst;
    out.open_worst = open_cmp.worst;
    for (std::size_t i = 0; i < closed_cmp.trace_distances.size(); ++i) {
        Json row;
        row["probe_index"] = i;
        row["closed_loop_trace_distance"] = closed_cmp.trace_distances[i];
        row["open_loop_trace_distance"] = open_cmp.trace_distances[i];
        out.per_probe.push_back(row);
    }
    return out;
}

int cmd_thermal(const CommandIO& io) {
    const Json& c = io.config;
    const char axis = axis_from_config(c);
    const DriveParams d =
        drive_from_config(need(c, "drive"), axis, opt_int(c, "preset_k", 1));
    const long num_devices = opt_int(c, "num_devices", 2);
    const long n_max = opt_int(c, "n_max", 45);
    const double n_bar = opt_num(c, "n_bar_thermal", 2.0);
    const long loops = opt_int(c, "loops_k", 1);
    const double tol = opt_num(c, "ode_tol", 1e-10);
    const std::uint64_t probe_seed =
        static_cast<std::uint64_t>(opt_int(c, "probe_seed", 20240901));
    const double max_closed = opt_num(c, "max_closed_trace_distance", 1e-6);
    const bool converge = opt_bool(c, "convergence_check", false);

    const ThermalRun r = run_thermal_once(axis, d, loops, n_max, n_bar, tol,
                                          probe_seed, num_devices);
    bool pass = r.closed_worst <= max_closed && r.open_worst > r.closed_worst;

    Json report = report_header("thermal", io);
    report["n_max"] = n_max;
    report["n_bar_thermal"] = n_bar;
    report["closed_loop_worst_trace_distance"] = r.closed_worst;
    report["open_loop_worst_trace_distance"] = r.open_worst;
    report["per_probe"] = r.per_probe;
    if (converge) {
        const ThermalRun r5 = run_thermal_once(axis, d, loops, n_max + 5,
                                               n_bar, tol, probe_seed,
                                               num_devices);
        report["closed_worst_at_n_max_plus_5"] = r5.closed_worst;
        const bool conv = std::abs(r5.closed_worst - r.closed_worst) < 1e-6;
        report["converged"] = conv;
        pass = pass && conv;
    }
    std::vector<std::string> rows;
    for (const Json& p : r.per_probe)
        rows.push_back(std::to_string(p.at("probe_index").get<long>()) + "," +
                       fmt17(p.at("closed_loop_trace_distance")) + "," +
                       fmt17(p.at("open_loop_trace_distance")));
    write_csv(io, "thermal_distances",
              "probe_index,closed_loop_trace_distance,"
              "open_loop_trace_distance",
              rows);
    return finish("thermal", io, std::move(report), pass,
                  "closed-loop worst " + fmt4(r.closed_worst) +
                      " (threshold " + fmt4(max_closed) + "), open-loop " +
                      fmt4(r.open_worst));
}

// ---------------------------------------------------------------------------
// trotter: alternating row/column schedules vs the exact target propagator;
// halving tau should cut the infidelity by ~4 (second-order splitting).
// ---------------------------------------------------------------------------

int cmd_trotter(const CommandIO& io) {
    const Json& c = io.config;
    const long M = need_int(c, "M");
    const DriveParams d = drive_from_config(need(c, "drive"), 0, 1);
    const double chi = d.chi();
    const LatticeSpec spec(M, chi, chi);
    const std::vector<long> loops_list = need_int_list(c, "loops_k_list");
    const double chi_T = need_num(c, "chi_T_total");
    const std::uint64_t seed =
        static_cast<std::uint64_t>(opt_int(c, "seed", 20240901));
    const double rmin = opt_num(c, "ratio_min", 3.0);
    const double rmax = opt_num(c, "ratio_max", 5.0);

    const HilbertSpace space = HilbertSpace::qubits(spec.num_devices());
    const OperatorMatrix h_target = target_hamiltonian(spec, space);
    std::mt19937_64 rng(seed);
    const Vec psi0 = random_pure_state(space.total_dim(), rng);
    const QuantumState state0 = QuantumState::make_pure(space, psi0);

    Json report = report_header("trotter", io);
    report["chi_rad_per_s"] = chi;
    Json ladder = Json::array();
    std::vector<std::string> rows;
    std::vector<double> infidelities;
    for (long k : loops_list) {
        const double tau = 2.0 * M_PI * k / d.delta();
        const long cycles = std::max(1L, std::lround(chi_T / (tau * chi)));
        const Schedule sched = trotter_schedule(spec, d, tau, cycles, seed);
        const PropagationResult res = trotter_evolve(sched, state0);
        const double T = tau * cycles * 2.0 * spec.M;  // wall time of slices
        const double t_target = tau * cycles;  // per-row accumulated phase time
        const Vec ref = expm_i(h_target.m, t_target) * psi0;
        const double infid = 1.0 - std::norm(cxd(ref.adjoint() * res.psi));
        infidelities.push_back(infid);
        Json row;
        row["loops_k"] = k;
        row["tau_s"] = tau;
        row["tau_chi"] = tau * chi;
        row["cycles"] = cycles;
        row["chi_T"] = tau * cycles * chi;
        row["slices"] = sched.slices.size();
        row["schedule_wall_time_s"] = T;
        row["infidelity"] = infid;
        ladder.push_back(row);
        rows.push_back(std::to_string(k) + "," + fmt17(tau * chi) + "," +
                       std::to_string(cycles) + "," + fmt17(infid));
    }
    Json ratios = Json::array();
    bool pass = true;
    std::ostringstream sum;
    for (std::size_t i = 0; i + 1 < infidelities.size(); ++i) {
        const double ratio = infidelities[i] / infidelities[i + 1];
        ratios.push_back(ratio);
        pass = pass && ratio >= rmin && ratio <= rmax;
        sum << "ratio " << fmt4(ratio) << " ";
    }
    if (infidelities.size() < 2) {
        pass = false;
        sum << "need at least two tau values ";
    }
    report["ladder"] = ladder;
    report["halving_ratios"] = ratios;
    write_csv(io, "trotter_ladder", "loops_k,tau_chi,cycles,infidelity", rows);
    return finish("trotter", io, std::move(report), pass,
                  sum.str() + "(required [" + fmt4(rmin) + ", " + fmt4(rmax) +
                      "])");
}

// ---------------------------------------------------------------------------
// prep: adiabatic preparation from the uniform-field ground state; doubles
// T_ramp until the ground-space overlap crosses the threshold, then checks
// the sudden limit against the static projection.
// ---------------------------------------------------------------------------

int cmd_prep(const CommandIO& io) {
    const Json& c = io.config;
    const long M = need_int(c, "M");
    const double chi_x = need_num(c, "chi_x_rad_per_s");
    const double chi_y = need_num(c, "chi_y_rad_per_s");
    const double field = need_num(c, "field_rad_per_s");
    const long logical_bit = opt_int(c, "logical_bit", 0);
    if (logical_bit != 0 && logical_bit != 1)
        throw config_error("config: key 'logical_bit' must be 0 or 1");
    const RampShape shape =
        ramp_shape_from_name(opt_str(c, "shape", "smoothstep"));
    const long plan_steps = opt_int(c, "plan_steps", 64);
    const double chi_T_start = opt_num(c, "chi_T_start", 1.0);
    const double chi_T_max = opt_num(c, "chi_T_max", 64.0);
    const double want_overlap = opt_num(c, "overlap_threshold", 0.99);
    const double tol = opt_num(c, "ode_tol", 1e-9);
    const double sudden_T = opt_num(c, "sudden_T_ramp_s", 1e-9);
    const double sudden_tol = opt_num(c, "sudden_match_tol", 1e-8);

    const LatticeSpec spec(M, chi_x, chi_y);
    const HilbertSpace space = HilbertSpace::qubits(spec.num_devices());
    const OperatorMatrix h_target = target_hamiltonian(spec, space);
    const int sign = logical_bit == 0 ? -1 : 1;
    const OperatorMatrix h_init = init_hamiltonian(sign, field, space);
    // ground of -(+)field*J_x: every device in |x+> (|x->)
    std::vector<Vec> parts(spec.num_devices(),
                           qubit_axis_state(logical_bit == 0 ? "x+" : "x-"));
    const QuantumState state0 =
        QuantumState::make_pure(space, kron_vec(parts));

    const double chi = std::max(chi_x, chi_y);
    Json ladder = Json::array();
    std::vector<std::string> rows;
    double reached_T = 0.0, reached_overlap = 0.0;
    bool reached = false;
    for (double chi_T = chi_T_start; chi_T <= chi_T_max * (1.0 + 1e-12);
         chi_T *= 2.0) {
        const double T = chi_T / chi;
        const AdiabaticPlan plan(T, plan_steps, shape);
        const AdiabaticResult r =
            adiabatic_evolve(h_init, h_target, plan, state0, tol);
        Json row;
        row["chi_T"] = chi_T;
        row["T_ramp_s"] = T;
        row["ground_overlap"] = r.ground_overlap;
        ladder.push_back(row);
        rows.push_back(fmt17(chi_T) + "," + fmt17(T) + "," +
                       fmt17(r.ground_overlap));
        reached_overlap = r.ground_overlap;
        reached_T = T;
        if (r.ground_overlap >= want_overlap) {
            reached = true;
            break;
        }
    }

    // sudden limit vs the static projection <psi0|P|psi0>
    const Mat p_target = ground_projector(h_target);
    const double static_overlap =
        std::real(cxd(state0.psi.adjoint() * p_target * state0.psi));
    const AdiabaticResult sudden = adiabatic_evolve(
        h_init, h_target, AdiabaticPlan(sudden_T, plan_steps, shape), state0,
        tol);
    const double sudden_dev =
        std::abs(sudden.ground_overlap - static_overlap);
    const bool sudden_ok = sudden_dev <= sudden_tol;

    Json report = report_header("prep", io);
    report["logical_bit"] = logical_bit;
    report["ladder"] = ladder;
    report["reached_overlap"] = reached_overlap;
    report["reached_T_ramp_s"] = reached_T;
    report["static_projection_overlap"] = static_overlap;
    report["sudden_overlap"] = sudden.ground_overlap;
    report["sudden_deviation"] = sudden_dev;
    write_csv(io, "prep_ladder", "chi_T,T_ramp_s,ground_overlap", rows);
    const bool pass = reached && sudden_ok;
    return finish("prep", io, std::move(report), pass,
                  "overlap " + fmt4(reached_overlap) + " at T_ramp " +
                      fmt4(reached_T) + " s (threshold " +
                      fmt4(want_overlap) + "); sudden deviation " +
                      fmt4(sudden_dev));
}

// ---------------------------------------------------------------------------
// protect: scalar action of low-weight Pauli strings on the ground doublet
// plus the splitting exponent under seeded random local fields.
// ---------------------------------------------------------------------------

int cmd_protect(const CommandIO& io) {
    const Json& c = io.config;
    const Json& runs_cfg = need(c, "runs");
    if (!runs_cfg.is_array() || runs_cfg.empty())
        throw config_error("config: key 'runs' must be a non-empty array");
    const double chi_x = need_num(c, "chi_x_rad_per_s");
    const double chi_y = need_num(c, "chi_y_rad_per_s");
    const std::vector<double> eps_fracs = need_num_list(c, "epsilon_over_chi");
    const long realizations = opt_int(c, "realizations", 3);
    const std::uint64_t seed =
        static_cast<std::uint64_t>(opt_int(c, "seed", 12345));
    const double max_dev = opt_num(c, "max_scalar_deviation", 1e-9);
    const double min_exp = opt_num(c, "min_splitting_exponent", 1.5);

    Json report = report_header("protect", io);
    Json runs = Json::array();
    std::vector<std::string> split_rows, op_rows;
    bool pass = true;
    std::ostringstream sum;
    for (const Json& rc : runs_cfg) {
        const long M = need_int(rc, "M");
        const int max_weight = static_cast<int>(need_int(rc, "max_weight"));
        const LatticeSpec spec(M, chi_x, chi_y);
        const HilbertSpace space = HilbertSpace::qubits(spec.num_devices());
        const OperatorMatrix h = target_hamiltonian(spec, space);
        std::vector<double> epsilons;
        for (double f : eps_fracs) epsilons.push_back(f * chi_x);
        const ProtectionReport pr = protection_diagnostic(
            h, max_weight, epsilons, realizations, seed);
        const bool ok = pr.max_scalar_deviation <= max_dev &&
                        pr.splitting_exponent > min_exp;
        Json run;
        run["M"] = M;
        run["max_weight"] = max_weight;
        run["operators_checked"] = pr.entries.size();
        run["max_scalar_deviation"] = pr.max_scalar_deviation;
        run["splitting_exponent"] = pr.splitting_exponent;
        run["seed"] = pr.seed;
        Json splits = Json::array();
        for (const SplittingSample& s : pr.splittings) {
            Json row;
            row["epsilon_rad_per_s"] = s.epsilon;
            row["mean_splitting_rad_per_s"] = s.splitting;
            splits.push_back(row);
            split_rows.push_back(std::to_string(M) + "," + fmt17(s.epsilon) +
                                 "," + fmt17(s.splitting));
        }
        run["splittings"] = splits;
        run["pass"] = ok;
        runs.push_back(run);
        for (const ProtectionEntry& e : pr.entries)
            op_rows.push_back(std::to_string(M) + "," +
                              std::to_string(e.op.weight()) + "," +
                              e.op.describe() + "," +
                              fmt17(e.scalar_deviation));
        pass = pass && ok;
        sum << "M=" << M << " max_dev=" << fmt4(pr.max_scalar_deviation)
            << " exponent=" << fmt4(pr.splitting_exponent) << "  ";
    }
    report["runs"] = runs;
    write_csv(io, "protect_splittings",
              "M,epsilon_rad_per_s,mean_splitting_rad_per_s", split_rows);
    write_csv(io, "protect_operators", "M,weight,operator,scalar_deviation",
              op_rows);
    return finish("protect", io, std::move(report), pass, sum.str());
}

// ---------------------------------------------------------------------------
// feasibility: closed-form experimental arithmetic with pass/fail against
// the published reference numbers.
// ---------------------------------------------------------------------------

int cmd_feasibility(const CommandIO& io) {
    const Json& c = io.config;
    const FeasibilityParams fp(
        need_num(c, "Q"), need_num(c, "omega_c_rad_per_s"),
        need_num(c, "gamma_s"), need_num(c, "Omega_rad_per_s"),
        need_num(c, "g"), need_num(c, "E_J_rad_per_s"),
        need_num(c, "delta_over_beta"), need_num(c, "epsilon_nonuniformity"));
    const double want_tau_us = opt_num(c, "expected_tau_c_us", 3.1830988618);
    const double want_beta_MHz =
        opt_num(c, "expected_beta_over_2pi_MHz", 48.3597848713);
    const double rel_tol = opt_num(c, "rel_tol", 0.02);
    const double infid_min = opt_num(c, "infidelity_min", 0.005);
    const double infid_max = opt_num(c, "infidelity_max", 0.010);

    const FeasibilityReport r = feasibility_report(fp);
    const double tau_us = r.tau_c_s * 1e6;
    const double beta_MHz = r.beta / units::two_pi / 1e6;
    const bool tau_ok =
        std::abs(tau_us - want_tau_us) <= rel_tol * want_tau_us;
    const bool beta_ok =
        std::abs(beta_MHz - want_beta_MHz) <= rel_tol * want_beta_MHz;
    const bool infid_ok =
        r.infidelity >= infid_min && r.infidelity <= infid_max;
    const bool pass = tau_ok && beta_ok && infid_ok && r.all_ok();

    Json report = report_header("feasibility", io);
    report["tau_c_us"] = tau_us;
    report["beta_over_2pi_MHz"] = beta_MHz;
    report["delta_over_2pi_MHz"] = r.delta / units::two_pi / 1e6;
    report["chi_over_2pi_MHz"] = r.chi / units::two_pi / 1e6;
    report["single_loop_gate_time_ns"] = r.t1_s * 1e9;
    report["operations_within_coherence"] = r.n_ops;
    report["nonuniformity_infidelity"] = r.infidelity;
    report["flags"] = Json{{"lamb_dicke_ok", r.ld_ok},
                           {"beta_delta_ok", r.beta_delta_ok},
                           {"delta_omega_ok", r.delta_omega_ok},
                           {"strong_coupling_ok", r.strong_coupling_ok}};
    report["notes"] = r.note;
    atomic_write(io.out_dir + "/feasibility_report.txt", r.text());
    return finish("feasibility", io, std::move(report), pass,
                  "tau_c " + fmt4(tau_us) + " us, beta/2pi " +
                      fmt4(beta_MHz) + " MHz, infidelity " +
                      fmt4(r.infidelity * 100) + " %");
}

// ---------------------------------------------------------------------------
// schedule compile / validate.
// ---------------------------------------------------------------------------

int cmd_schedule_compile(const std::string& spec_path,
                         const std::string& out_path) {
    const std::string bytes = read_file(spec_path);
    Json j = Json::parse(bytes, nullptr, false);
    if (j.is_discarded())
        throw config_error("config: not valid JSON: " + spec_path);
    const std::string kind = need_str(j, "kind");
    const DriveParams d = drive_from_config(need(j, "drive"), 0, 1);
    const LatticeSpec spec(need_int(j, "M"), d.chi(), d.chi());
    const std::uint64_t seed =
        static_cast<std::uint64_t>(opt_int(j, "seed", 0));

    Schedule sched = [&] {
        if (kind == "trotter")
            return trotter_schedule(spec, d, need_num(j, "tau_s"),
                                    need_int(j, "cycles"), seed);
        if (kind == "prep") {
            const Json& pj = need(j, "plan");
            const AdiabaticPlan plan(
                need_num(pj, "T_ramp_s"), need_int(pj, "steps"),
                ramp_shape_from_name(need_str(pj, "shape")));
            return prep_schedule(static_cast<int>(need_int(j, "logical_bit")),
                                 spec, d, plan, seed);
        }
        throw config_error(
            "config: key 'kind' must be \"trotter\" or \"prep\"");
    }();
    atomic_write(out_path, emit_json(sched));
    std::cout << "[PASS] schedule compile: wrote " << out_path << " ("
              << sched.slices.size() << " slices, config "
              << fnv1a64_hex(j.dump(2) + "\n") << ")\n";
    return 0;
}

int cmd_schedule_validate(const std::string& spec_path) {
    const std::string bytes = read_file(spec_path);
    const Schedule s = parse_json(bytes);  // throws config_error subtypes
    const bool canonical = emit_json(s) == bytes;
    std::cout << "[PASS] schedule validate: " << spec_path << " (version "
              << s.version << ", " << s.slices.size() << " slices"
              << (canonical ? ", canonical bytes" : "") << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "topoqubit-sim: desk-scale simulator and verification suite for "
        "cavity-mediated collective-coupling qubit lattices"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", spec_path, sched_out;

    auto add_config_cmd = [&](const std::string& name,
                              const std::string& desc) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "JSON run configuration")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (default .)");
        return sub;
    };

    CLI::App* spectrum_cmd = add_config_cmd(
        "spectrum", "ground degeneracy and gap of the target Hamiltonian");
    CLI::App* gate_cmd = add_config_cmd(
        "gate", "closed-loop geometric gate vs closed form and effective gate");
    CLI::App* thermal_cmd = add_config_cmd(
        "thermal", "cavity-state insensitivity of the closed-loop qubit map");
    CLI::App* trotter_cmd = add_config_cmd(
        "trotter", "alternating row/column schedule error-scaling audit");
    CLI::App* prep_cmd = add_config_cmd(
        "prep", "adiabatic ground-space preparation with T_ramp doubling");
    CLI::App* protect_cmd = add_config_cmd(
        "protect", "ground-space protection against low-weight operators");
    CLI::App* feasibility_cmd = add_config_cmd(
        "feasibility", "experimental feasibility arithmetic");

    CLI::App* schedule_cmd =
        app.add_subcommand("schedule", "compile or validate pulse schedules");
    schedule_cmd->require_subcommand(1);
    CLI::App* compile_cmd = schedule_cmd->add_subcommand(
        "compile", "build a schedule JSON from a compile spec");
    compile_cmd->add_option("--spec", spec_path, "compile specification JSON")
        ->required()
        ->check(CLI::ExistingFile);
    compile_cmd->add_option("--out", sched_out, "output schedule path")
        ->required();
    CLI::App* validate_cmd = schedule_cmd->add_subcommand(
        "validate", "parse and validate an existing schedule JSON");
    validate_cmd->add_option("--spec", spec_path, "schedule JSON to validate")
        ->required()
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // usage problems are config errors
    }

    try {
        if (spectrum_cmd->parsed())
            return cmd_spectrum(load_config(config_path, out_dir));
        if (gate_cmd->parsed())
            return cmd_gate(load_config(config_path, out_dir));
        if (thermal_cmd->parsed())
            return cmd_thermal(load_config(config_path, out_dir));
        if (trotter_cmd->parsed())
            return cmd_trotter(load_config(config_path, out_dir));
        if (prep_cmd->parsed())
            return cmd_prep(load_config(config_path, out_dir));
        if (protect_cmd->parsed())
            return cmd_protect(load_config(config_path, out_dir));
        if (feasibility_cmd->parsed())
            return cmd_feasibility(load_config(config_path, out_dir));
        if (compile_cmd->parsed())
            return cmd_schedule_compile(spec_path, sched_out);
        if (validate_cmd->parsed())
            return cmd_schedule_validate(spec_path);
    } catch (const guard_error& e) {
        std::cerr << "GUARD VIOLATION: " << e.what() << "\n";
        return 3;
    } catch (const config_error& e) {
        std::cerr << "CONFIG ERROR: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "CONFIG ERROR: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "INTERNAL ERROR: " << e.what() << "\n";
        return 3;
    }
    std::cerr << "CONFIG ERROR: no command selected\n";
    return 2;
}
