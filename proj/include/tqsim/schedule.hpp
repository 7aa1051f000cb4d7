#pragma once
// Pulse-program compiler: time-sliced per-device flux schedules for
// Trotterized row/column coupling and the two-step preparation protocol,
// plus a versioned, canonical JSON serialization with validation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tqsim/device.hpp"
#include "tqsim/drive.hpp"
#include "tqsim/lattice.hpp"

namespace tqsim {

// Distinct parse failure kinds (all map to the config-error exit code).
struct schedule_parse_error : config_error {
    using config_error::config_error;
};
struct schedule_version_error : config_error {
    using config_error::config_error;
};
struct schedule_invariant_error : config_error {
    using config_error::config_error;
};

inline constexpr double trotter_guard = 0.05;
inline constexpr const char* schedule_version = "1";

enum class RampShape { linear, smoothstep };

inline RampShape ramp_shape_from_name(const std::string& name) {
    if (name == "linear") return RampShape::linear;
    if (name == "smoothstep") return RampShape::smoothstep;
    throw config_error("unknown ramp shape: " + name);
}

inline const char* ramp_shape_name(RampShape s) {
    return s == RampShape::linear ? "linear" : "smoothstep";
}

// Interpolation weight lambda(x) on x in [0, 1].
inline double ramp_lambda(RampShape s, double x) {
    x = std::clamp(x, 0.0, 1.0);
    return s == RampShape::linear ? x : x * x * (3.0 - 2.0 * x);
}

// Adiabatic switching plan: total ramp time, discretization, and shape.
struct AdiabaticPlan {
    double T_ramp_s;
    long steps;
    RampShape shape;

    AdiabaticPlan(double T_ramp_s_, long steps_, RampShape shape_)
        : T_ramp_s(T_ramp_s_), steps(steps_), shape(shape_) {
        if (!(T_ramp_s > 0.0))
            throw config_error("AdiabaticPlan: T_ramp must be positive");
        if (steps < 10) throw config_error("AdiabaticPlan: steps must be >= 10");
    }
};

// Parsed slice intent.
//   rowX:<i>             row-i X coupling     (optionally :<s>/<S>[:<shape>])
//   colY:<j>             column-j Y coupling  (optionally :<s>/<S>[:<shape>])
//   ramp:<s>/<S>:<shape> interpolated field step
//   globalX              full-strength field
//   idle                 no drive
struct Intent {
    enum class Kind { row_x, col_y, ramp, global_x, idle } kind;
    long index = 0;   // row or column (1-based)
    long step = 0;    // ramp step s (1-based), 0 when untagged
    long steps = 0;   // total ramp steps S
    RampShape shape = RampShape::linear;

    // Interpolation weight at the step midpoint; 1 for untagged coupling
    // slices, 0 never (untagged field slices are full strength).
    double lambda() const {
        if (step == 0) return 1.0;
        return ramp_lambda(shape, (static_cast<double>(step) - 0.5) /
                                      static_cast<double>(steps));
    }
};

inline Intent parse_intent(const std::string& s) {
    auto split = [](const std::string& str, char sep) {
        std::vector<std::string> parts;
        std::size_t pos = 0;
        while (true) {
            std::size_t next = str.find(sep, pos);
            parts.push_back(str.substr(pos, next - pos));
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        return parts;
    };
    auto parse_long = [](const std::string& str) {
        std::size_t used = 0;
        long v = 0;
        try {
            v = std::stol(str, &used);
        } catch (const std::exception&) {
            used = std::string::npos;
        }
        if (used != str.size() || v < 1)
            throw config_error("intent: bad positive integer '" + str + "'");
        return v;
    };
    auto parse_step_tag = [&](const std::string& tag, Intent& in) {
        auto sl = split(tag, '/');
        if (sl.size() != 2) throw config_error("intent: bad step tag " + tag);
        in.step = parse_long(sl[0]);
        in.steps = parse_long(sl[1]);
        if (in.step > in.steps)
            throw config_error("intent: ramp step exceeds step count");
    };

    Intent in{};
    const auto parts = split(s, ':');
    if (parts[0] == "idle" && parts.size() == 1) {
        in.kind = Intent::Kind::idle;
    } else if (parts[0] == "globalX" && parts.size() == 1) {
        in.kind = Intent::Kind::global_x;
    } else if ((parts[0] == "rowX" || parts[0] == "colY") &&
               parts.size() >= 2 && parts.size() <= 4) {
        in.kind = parts[0] == "rowX" ? Intent::Kind::row_x : Intent::Kind::col_y;
        in.index = parse_long(parts[1]);
        if (parts.size() >= 3) parse_step_tag(parts[2], in);
        if (parts.size() == 4) in.shape = ramp_shape_from_name(parts[3]);
    } else if (parts[0] == "ramp" && parts.size() == 3) {
        in.kind = Intent::Kind::ramp;
        parse_step_tag(parts[1], in);
        in.shape = ramp_shape_from_name(parts[2]);
    } else {
        throw config_error("unrecognized intent: " + s);
    }
    return in;
}

struct TimeSlice {
    double duration_s = 0.0;
    std::string intent;
    std::vector<long> devices;  // 1-based device labels
    FluxSetting flux;
};

struct ScheduleMetadata {
    std::uint64_t seed = 0;
    std::string tool_version_str = tool_version;
    std::optional<double> tau_snapped_from_s;
};

struct Schedule {
    std::string version = schedule_version;
    LatticeSpec spec;
    DriveParams drive;
    std::vector<TimeSlice> slices;
    ScheduleMetadata metadata;
};

// ---------------------------------------------------------------------------
// Validation.

namespace detail {

inline bool closes_loop(double duration_s, double delta) {
    const double k = duration_s * delta / (2.0 * M_PI);
    return k >= 0.5 && std::abs(k - std::round(k)) <= 1e-6 * std::max(1.0, k);
}

}  // namespace detail

// Returns the list of invariant violations; empty iff the schedule is valid.
inline std::vector<std::string> validate(const Schedule& sched) {
    std::vector<std::string> v;
    if (sched.version != schedule_version)
        v.push_back("unknown version: " + sched.version);

    const double chi = sched.drive.chi();
    const double max_chi = std::max(sched.spec.chi_x, sched.spec.chi_y);
    if (std::abs(sched.spec.chi_x - chi) > 1e-9 * chi ||
        std::abs(sched.spec.chi_y - chi) > 1e-9 * chi)
        v.push_back("spec/drive chi mismatch");

    const long N = sched.spec.num_devices();
    for (std::size_t i = 0; i < sched.slices.size(); ++i) {
        const TimeSlice& sl = sched.slices[i];
        const std::string tag = "slice " + std::to_string(i) + ": ";
        if (!(sl.duration_s > 0.0)) {
            v.push_back(tag + "nonpositive duration");
            continue;
        }
        if (sl.duration_s * max_chi > trotter_guard * (1.0 + 1e-9))
            v.push_back(tag + "trotter guard violated");

        Intent in{};
        try {
            in = parse_intent(sl.intent);
        } catch (const config_error& e) {
            v.push_back(tag + e.what());
            continue;
        }
        for (long d : sl.devices)
            if (d < 1 || d > N) {
                v.push_back(tag + "device label out of range");
                break;
            }
        if (sl.flux.mode == FluxMode::ac &&
            !detail::closes_loop(sl.duration_s, sched.drive.delta()))
            v.push_back(tag + "geometric closure violated (ac slice)");
        if (in.kind == Intent::Kind::row_x || in.kind == Intent::Kind::col_y) {
            if (sl.flux.mode != FluxMode::ac)
                v.push_back(tag + "coupling slice must use ac flux");
            const std::vector<long> want =
                in.kind == Intent::Kind::row_x
                    ? row_devices(std::min(in.index, sched.spec.M), sched.spec.M)
                    : col_devices(std::min(in.index, sched.spec.M), sched.spec.M);
            if (in.index > sched.spec.M || sl.devices != want)
                v.push_back(tag + "intent/devices mismatch");
            const auto [eta, xi] =
                eta_xi(sl.flux.phi_plus(), sl.flux.phi_minus());
            const cxd expect = in.kind == Intent::Kind::row_x ? cxd(2, 0)
                                                              : cxd(0, -2);
            if (std::abs(eta - expect) > 1e-9 || std::abs(xi - expect) > 1e-9)
                v.push_back(tag + "flux preset does not match coupling axis");
        }
        if (in.kind == Intent::Kind::ramp || in.kind == Intent::Kind::global_x) {
            if (sl.flux.mode != FluxMode::dc)
                v.push_back(tag + "field slice must use dc flux");
        }
    }

    // per Trotter cycle every row and column appears equally often
    std::vector<long> row_count(sched.spec.M + 1, 0),
        col_count(sched.spec.M + 1, 0);
    for (const TimeSlice& sl : sched.slices) {
        Intent in{};
        try {
            in = parse_intent(sl.intent);
        } catch (const config_error&) {
            continue;
        }
        if (in.index >= 1 && in.index <= sched.spec.M) {
            if (in.kind == Intent::Kind::row_x) ++row_count[in.index];
            if (in.kind == Intent::Kind::col_y) ++col_count[in.index];
        }
    }
    for (long i = 1; i <= sched.spec.M; ++i)
        if (row_count[i] != row_count[1] || col_count[i] != row_count[1])
            v.push_back("rows and columns are not balanced");
    return v;
}

// ---------------------------------------------------------------------------
// Generators.

namespace detail {

inline FluxSetting coupling_flux(char axis, const DriveParams& d) {
    const auto [pm, pp] = coupling_preset(axis, d.k);
    // phi1 = phi_plus + phi_minus, phi2 = phi_plus - phi_minus
    return FluxSetting::ac(pp + pm, pp - pm, d.omega);
}

}  // namespace detail

// Trotterized coupling program: `cycles` repetitions of M row slices (X
// preset) followed by M column slices (Y preset), each of duration tau
// snapped to the nearest closed loop 2 pi k / delta (within 1%).
inline Schedule trotter_schedule(const LatticeSpec& spec, const DriveParams& d,
                                 double tau_s, long cycles,
                                 std::uint64_t seed = 0) {
    if (cycles < 1) throw config_error("trotter_schedule: cycles must be >= 1");
    if (!(tau_s > 0.0)) throw config_error("trotter_schedule: tau must be > 0");

    const double loop = 2.0 * M_PI / d.delta();
    const double k = std::max(1.0, std::round(tau_s / loop));
    const double tau = k * loop;
    if (std::abs(tau - tau_s) > 0.01 * tau_s)
        throw config_error(
            "trotter_schedule: tau is not a closed loop within the 1% snap");
    const double max_chi = std::max(spec.chi_x, spec.chi_y);
    if (tau * max_chi > trotter_guard * (1.0 + 1e-9))
        throw guard_error("trotter_schedule: tau * chi exceeds the guard");

    Schedule s{schedule_version, spec, d, {}, {}};
    s.metadata.seed = seed;
    if (std::abs(tau - tau_s) > 1e-12 * tau_s)
        s.metadata.tau_snapped_from_s = tau_s;
    const FluxSetting fx = detail::coupling_flux('x', d);
    const FluxSetting fy = detail::coupling_flux('y', d);
    for (long c = 0; c < cycles; ++c) {
        for (long i = 1; i <= spec.M; ++i)
            s.slices.push_back({tau, "rowX:" + std::to_string(i),
                                row_devices(i, spec.M), fx});
        for (long j = 1; j <= spec.M; ++j)
            s.slices.push_back({tau, "colY:" + std::to_string(j),
                                col_devices(j, spec.M), fy});
    }
    return s;
}

// Preparation program for one logical bit: per ramp step, a dc field slice
// (inter-loop phase 0 for bit 0, pi for bit 1; interpolation weight carried
// by the intent tag) followed by one Trotter micro-cycle of closed-loop
// coupling slices. The interpolation is intent-level: the drive offers no
// continuous coupling-strength knob, so the executor scales the effective
// generators by lambda.
inline Schedule prep_schedule(int logical_bit, const LatticeSpec& spec,
                              const DriveParams& d, const AdiabaticPlan& plan,
                              std::uint64_t seed = 0) {
    if (logical_bit != 0 && logical_bit != 1)
        throw config_error("prep_schedule: logical_bit must be 0 or 1");

    const double chi = d.chi();
    const double max_chi = std::max(spec.chi_x, spec.chi_y);
    // largest closed loop obeying the guard
    const long k_mu = static_cast<long>(
        std::floor(trotter_guard * (1.0 + 1e-9) /
                   (2.0 * M_PI / d.delta() * chi)));
    if (k_mu < 1)
        throw config_error(
            "prep_schedule: detuning too small for a guarded closed-loop "
            "coupling slice");
    const double tau_mu = 2.0 * M_PI * k_mu / d.delta();

    const double t_step = plan.T_ramp_s / static_cast<double>(plan.steps);
    const double t_field = t_step - 2.0 * spec.M * tau_mu;
    if (!(t_field > 0.0))
        throw config_error(
            "prep_schedule: ramp step too short for the coupling micro-cycle");
    if (t_field * max_chi > trotter_guard * (1.0 + 1e-9))
        throw config_error(
            "prep_schedule: ramp step too long for the trotter guard; "
            "increase steps");

    // bit 0 <-> phi = 0 (field -2 E_J J_x, ground state all |+>);
    // bit 1 <-> phi = pi (field +2 E_J J_x, ground state all |->)
    const double phi_field = logical_bit == 0 ? 0.0 : M_PI;
    const FluxSetting field_flux = FluxSetting::dc(0.0, 0.0, phi_field);
    const FluxSetting fx = detail::coupling_flux('x', d);
    const FluxSetting fy = detail::coupling_flux('y', d);
    std::vector<long> all(spec.num_devices());
    for (long q = 0; q < spec.num_devices(); ++q) all[q] = q + 1;

    Schedule s{schedule_version, spec, d, {}, {}};
    s.metadata.seed = seed;
    const std::string steps_str = std::to_string(plan.steps);
    for (long st = 1; st <= plan.steps; ++st) {
        const std::string tag = std::to_string(st) + "/" + steps_str + ":" +
                                ramp_shape_name(plan.shape);
        s.slices.push_back({t_field, "ramp:" + tag, all, field_flux});
        for (long i = 1; i <= spec.M; ++i)
            s.slices.push_back({tau_mu, "rowX:" + std::to_string(i) + ":" + tag,
                                row_devices(i, spec.M), fx});
        for (long j = 1; j <= spec.M; ++j)
            s.slices.push_back({tau_mu, "colY:" + std::to_string(j) + ":" + tag,
                                col_devices(j, spec.M), fy});
    }
    return s;
}

// ---------------------------------------------------------------------------
// Canonical JSON serialization (byte-identical round trip).

inline std::string emit_json(const Schedule& s) {
    nlohmann::ordered_json j;
    j["version"] = s.version;
    j["spec"] = {{"M", s.spec.M},
                 {"chi_x", s.spec.chi_x},
                 {"chi_y", s.spec.chi_y}};
    j["drive"] = {{"g", s.drive.g},         {"E_J", s.drive.E_J},
                  {"omega", s.drive.omega}, {"omega_c", s.drive.omega_c},
                  {"delta", s.drive.delta()}, {"k", s.drive.k}};
    j["slices"] = nlohmann::ordered_json::array();
    for (const TimeSlice& sl : s.slices) {
        nlohmann::ordered_json flux;
        flux["phi1"] = sl.flux.phi1;
        flux["phi2"] = sl.flux.phi2;
        if (sl.flux.mode == FluxMode::dc)
            flux["inter"] = {{"mode", "dc"}, {"phi", sl.flux.phi}};
        else
            flux["inter"] = {{"mode", "ac"}, {"omega", sl.flux.omega}};
        j["slices"].push_back({{"duration_s", sl.duration_s},
                               {"intent", sl.intent},
                               {"devices", sl.devices},
                               {"flux", flux}});
    }
    j["metadata"]["seed"] = s.metadata.seed;
    j["metadata"]["tool_version"] = s.metadata.tool_version_str;
    if (s.metadata.tau_snapped_from_s)
        j["metadata"]["tau_snapped_from_s"] = *s.metadata.tau_snapped_from_s;
    return j.dump(2) + "\n";
}

inline Schedule parse_json(const std::string& bytes) {
    nlohmann::ordered_json j =
        nlohmann::ordered_json::parse(bytes, nullptr, false);
    if (j.is_discarded())
        throw schedule_parse_error("schedule: malformed JSON");

    try {
        const std::string version = j.at("version").get<std::string>();
        if (version != schedule_version)
            throw schedule_version_error("schedule: unknown version '" +
                                         version + "'");

        const auto& js = j.at("spec");
        LatticeSpec spec(js.at("M").get<long>(), js.at("chi_x").get<double>(),
                         js.at("chi_y").get<double>());
        const auto& jd = j.at("drive");
        DriveParams drive(jd.at("g").get<double>(), jd.at("E_J").get<double>(),
                          jd.at("omega").get<double>(),
                          jd.at("omega_c").get<double>(), 0.0, 0.0,
                          jd.at("k").get<long>());
        const double delta = jd.at("delta").get<double>();
        if (std::abs(delta - drive.delta()) > 1e-9 * drive.delta())
            throw schedule_invariant_error(
                "schedule: drive.delta is not omega_c - omega");

        Schedule s{version, spec, drive, {}, {}};
        for (const auto& sl : j.at("slices")) {
            TimeSlice t;
            t.duration_s = sl.at("duration_s").get<double>();
            t.intent = sl.at("intent").get<std::string>();
            t.devices = sl.at("devices").get<std::vector<long>>();
            const auto& fl = sl.at("flux");
            const auto& inter = fl.at("inter");
            const std::string mode = inter.at("mode").get<std::string>();
            if (mode == "dc")
                t.flux = FluxSetting::dc(fl.at("phi1").get<double>(),
                                         fl.at("phi2").get<double>(),
                                         inter.at("phi").get<double>());
            else if (mode == "ac")
                t.flux = FluxSetting::ac(fl.at("phi1").get<double>(),
                                         fl.at("phi2").get<double>(),
                                         inter.at("omega").get<double>());
            else
                throw schedule_invariant_error("schedule: unknown flux mode '" +
                                               mode + "'");
            s.slices.push_back(std::move(t));
        }
        const auto& jm = j.at("metadata");
        s.metadata.seed = jm.at("seed").get<std::uint64_t>();
        s.metadata.tool_version_str = jm.at("tool_version").get<std::string>();
        if (jm.contains("tau_snapped_from_s"))
            s.metadata.tau_snapped_from_s =
                jm.at("tau_snapped_from_s").get<double>();

        const auto violations = validate(s);
        if (!violations.empty()) {
            std::string msg = "schedule: invariant violations:";
            for (const auto& v : violations) msg += "\n  " + v;
            throw schedule_invariant_error(msg);
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw schedule_parse_error(std::string("schedule: bad structure: ") +
                                   e.what());
    }
}

}  // namespace tqsim
