#include "ddsim/experiment_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ddsim {

using nlohmann::json;

namespace {

const std::set<std::string> kTopKeys{
    "name",        "schemes",     "modes",       "frame",     "afdm",       "constellation_order",
    "frames_per_pilot", "snr_db", "nu_max",      "trials",    "seed",       "pulse",
    "guard",       "mask_guard",  "profile",     "evolution_c", "quadrature", "pilot_index",
    "tap_threshold"};

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) throw ConfigError("unknown key '" + where + key + "' in experiment spec");
    }
}

template <class T>
T get_as(const json& obj, const std::string& key, const std::string& where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value for '" + where + key + "' in experiment spec");
    }
}

template <class T>
void read_if(const json& obj, const std::string& key, T& out, const std::string& where = {}) {
    if (obj.contains(key)) out = get_as<T>(obj, key, where);
}

const json& object_at(const json& obj, const std::string& key) {
    const json& v = obj.at(key);
    if (!v.is_object()) throw ConfigError("'" + key + "' must be an object in experiment spec");
    return v;
}

Rational read_rational(const json& v, const std::string& key) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
        throw ConfigError("'afdm." + key + "' must be [numerator, denominator]");
    }
    Rational r{v[0].get<std::int64_t>(), v[1].get<std::int64_t>()};
    if (r.den <= 0) throw ConfigError("'afdm." + key + "' needs a positive denominator");
    return r;
}

std::string mode_key(EstimationMode m) { return to_string(m); }

std::string scheme_key(SchemeTag t) {
    switch (t) {
        case SchemeTag::OFDM: return "ofdm";
        case SchemeTag::AFDM: return "afdm";
        case SchemeTag::OTSM: return "otsm";
        case SchemeTag::ZakOTFS: return "zak";
    }
    return "zak";
}

// Shortest text that round-trips the double.
std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    for (int prec = 6; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

}  // namespace

ExperimentSpec parse_spec(const json& input, const std::filesystem::path& base_dir) {
    const json& doc = input.contains("spec") ? input.at("spec") : input;
    if (!doc.is_object()) throw ConfigError("experiment spec must be an object");
    reject_unknown(doc, kTopKeys, "");

    ExperimentSpec spec;
    read_if(doc, "name", spec.name);
    if (doc.contains("schemes")) {
        spec.schemes.clear();
        for (const auto& s : get_as<std::vector<std::string>>(doc, "schemes", "")) spec.schemes.push_back(parse_scheme(s));
    }
    if (doc.contains("modes")) {
        spec.modes.clear();
        for (const auto& s : get_as<std::vector<std::string>>(doc, "modes", "")) spec.modes.push_back(parse_mode(s));
    }
    if (doc.contains("frame")) {
        const json& f = object_at(doc, "frame");
        reject_unknown(f, {"M", "N", "delta_f", "f_c"}, "frame.");
        int M = spec.config.M, N = spec.config.N;
        double df = spec.config.delta_f, fc = spec.config.f_c;
        read_if(f, "M", M, "frame.");
        read_if(f, "N", N, "frame.");
        read_if(f, "delta_f", df, "frame.");
        read_if(f, "f_c", fc, "frame.");
        spec.config = make_config(M, N, df, fc);
    }
    if (doc.contains("afdm")) {
        const json& a = object_at(doc, "afdm");
        reject_unknown(a, {"c1", "c2"}, "afdm.");
        if (a.contains("c1")) spec.afdm.c1 = read_rational(a.at("c1"), "c1");
        if (a.contains("c2")) spec.afdm.c2 = read_rational(a.at("c2"), "c2");
    }
    read_if(doc, "constellation_order", spec.constellation_order);
    read_if(doc, "frames_per_pilot", spec.frames_per_pilot);
    read_if(doc, "snr_db", spec.snr_db);
    read_if(doc, "nu_max", spec.nu_max);
    read_if(doc, "trials", spec.trials);
    read_if(doc, "seed", spec.seed);
    if (doc.contains("pulse")) {
        const json& p = object_at(doc, "pulse");
        reject_unknown(p, {"kind", "beta"}, "pulse.");
        std::string kind = "gaussian_sinc";
        read_if(p, "kind", kind, "pulse.");
        if (kind == "sinc") spec.pulse = PulseKind::Sinc;
        else if (kind == "gaussian_sinc") spec.pulse = PulseKind::GaussianSinc;
        else throw ConfigError("unknown pulse kind: " + kind);
        read_if(p, "beta", spec.pulse_beta, "pulse.");
    }
    read_if(doc, "guard", spec.guard);
    read_if(doc, "mask_guard", spec.mask_guard);
    if (doc.contains("profile") && !doc.at("profile").is_null()) {
        std::filesystem::path p = get_as<std::string>(doc, "profile", "");
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        spec.profile_path = std::filesystem::absolute(p).lexically_normal().string();
    }
    read_if(doc, "evolution_c", spec.evolution_c);
    if (doc.contains("quadrature")) {
        const json& q = object_at(doc, "quadrature");
        reject_unknown(q, {"points_per_bin", "tolerance"}, "quadrature.");
        read_if(q, "points_per_bin", spec.quadrature.points_per_bin, "quadrature.");
        read_if(q, "tolerance", spec.quadrature.tolerance, "quadrature.");
    }
    read_if(doc, "pilot_index", spec.pilot_index);
    read_if(doc, "tap_threshold", spec.tap_threshold);

    if (spec.schemes.empty() || spec.modes.empty()) throw ConfigError("spec needs at least one scheme and one mode");
    if (spec.snr_db.empty() || spec.nu_max.empty() || spec.frames_per_pilot.empty()) {
        throw ConfigError("snr_db, nu_max and frames_per_pilot must be non-empty");
    }
    for (int f : spec.frames_per_pilot) {
        if (f < 1) throw ConfigError("frames_per_pilot entries must be >= 1");
    }
    for (double nu : spec.nu_max) {
        if (!(nu >= 0.0)) throw ConfigError("nu_max entries must be non-negative");
    }
    if (spec.trials < 1) throw ConfigError("trials must be >= 1");
    if (spec.guard < 0 || spec.mask_guard < 0) throw ConfigError("guards must be non-negative");
    if (spec.quadrature.points_per_bin < 2 || !(spec.quadrature.tolerance > 0.0)) {
        throw ConfigError("quadrature needs points_per_bin >= 2 and a positive tolerance");
    }
    if (!(spec.evolution_c > 0.0)) throw ConfigError("evolution_c must be positive");
    return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read experiment spec: " + path.string());
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("experiment spec " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_spec(doc, path.parent_path());
}

json spec_to_json(const ExperimentSpec& spec) {
    json j;
    j["name"] = spec.name;
    j["schemes"] = json::array();
    for (auto s : spec.schemes) j["schemes"].push_back(scheme_key(s));
    j["modes"] = json::array();
    for (auto m : spec.modes) j["modes"].push_back(mode_key(m));
    j["frame"] = {{"M", spec.config.M}, {"N", spec.config.N}, {"delta_f", spec.config.delta_f}, {"f_c", spec.config.f_c}};
    j["afdm"] = json::object();
    if (spec.afdm.c1) j["afdm"]["c1"] = {spec.afdm.c1->num, spec.afdm.c1->den};
    if (spec.afdm.c2) j["afdm"]["c2"] = {spec.afdm.c2->num, spec.afdm.c2->den};
    j["constellation_order"] = spec.constellation_order;
    j["frames_per_pilot"] = spec.frames_per_pilot;
    j["snr_db"] = spec.snr_db;
    j["nu_max"] = spec.nu_max;
    j["trials"] = spec.trials;
    j["seed"] = spec.seed;
    j["pulse"] = {{"kind", spec.pulse == PulseKind::Sinc ? "sinc" : "gaussian_sinc"}, {"beta", spec.pulse_beta}};
    j["guard"] = spec.guard;
    j["mask_guard"] = spec.mask_guard;
    j["profile"] = spec.profile_path ? json(*spec.profile_path) : json(nullptr);
    j["evolution_c"] = spec.evolution_c;
    j["quadrature"] = {{"points_per_bin", spec.quadrature.points_per_bin}, {"tolerance", spec.quadrature.tolerance}};
    j["pilot_index"] = spec.pilot_index;
    j["tap_threshold"] = spec.tap_threshold;
    return j;
}

void write_csv(std::ostream& out, const std::vector<MetricRow>& rows) {
    out << "scheme,mode,F,snr_db,nu_max,frame_index,trials,ber,ber_ci,nmse_db,se\n";
    for (const auto& r : rows) {
        const double nmse_db = std::isnan(r.nmse) ? r.nmse : 10.0 * std::log10(r.nmse);
        out << to_string(r.cell.scheme) << ',' << to_string(r.cell.mode) << ',' << r.cell.frames << ','
            << num(r.cell.snr_db) << ',' << num(r.cell.nu_max) << ','
            << (r.frame_index == 0 ? std::string("all") : std::to_string(r.frame_index)) << ',' << r.trials << ','
            << num(r.ber) << ',' << num(r.ber_ci) << ',' << num(nmse_db) << ',' << num(r.se) << '\n';
    }
}

std::string format_csv(const std::vector<MetricRow>& rows) {
    std::ostringstream out;
    write_csv(out, rows);
    return out.str();
}

json manifest_to_json(const RunManifest& m) {
    json j;
    j["spec"] = spec_to_json(m.spec);
    j["seed"] = m.spec.seed;
    j["version"] = m.version;
    j["started_utc"] = m.started_utc;
    j["wall_clock_s"] = m.wall_clock_s;
    j["outputs"] = m.outputs;
    j["failures"] = json::array();
    for (const auto& f : m.failures) {
        j["failures"].push_back({{"scheme", to_string(f.cell.scheme)},
                                 {"mode", to_string(f.cell.mode)},
                                 {"F", f.cell.frames},
                                 {"snr_db", f.cell.snr_db},
                                 {"nu_max", f.cell.nu_max},
                                 {"message", f.message}});
    }
    return j;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

std::string library_version() { return "ddsim 0.1.0"; }

}  // namespace ddsim
