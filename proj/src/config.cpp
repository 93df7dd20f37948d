// SPDX-License-Identifier: Apache-2.0
#include "tandem_tail/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "tandem_tail/errors.hpp"

namespace tandem::config {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

double parse_double(const std::string& text, int line, const std::string& field) {
    if (text.empty()) throw ConfigError(line, field, "expected a number, got nothing");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || errno == ERANGE) {
        throw ConfigError(line, field, "expected a number, got '" + text + "'");
    }
    if (!std::isfinite(v)) throw ConfigError(line, field, "value must be finite");
    return v;
}

template <class Int>
Int parse_int(const std::string& text, int line, const std::string& field) {
    Int v{};
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (text.empty() || ec != std::errc{} || ptr != last) {
        throw ConfigError(line, field, "expected an integer, got '" + text + "'");
    }
    return v;
}

std::vector<double> parse_list(const std::string& text, int line, const std::string& field) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) out.push_back(parse_double(item, line, field));
    return out;
}

Vec3 parse_vec3(const std::string& text, int line, const std::string& field) {
    const auto v = parse_list(text, line, field);
    if (v.size() != 3) throw ConfigError(line, field, "expected 3 comma-separated numbers");
    return {v[0], v[1], v[2]};
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) out += ", ";
        out += format_double(v[i]);
    }
    return out;
}

std::string join(const Vec3& v) { return join(std::vector<double>(v.begin(), v.end())); }

void set_field(RunManifest& m, const std::string& section, const std::string& key,
               const std::string& value, int line) {
    const std::string field = section + "." + key;
    auto unknown = [&] { throw ConfigError(line, field, "unknown key"); };

    if (section == "model") {
        if (key == "mode") {
            try {
                m.mode = stability_mode_from_string(value);
            } catch (const Error& e) {
                throw ConfigError(line, field, e.what());
            }
        } else {
            unknown();
        }
        return;
    }
    if (section.rfind("model.node", 0) == 0) {
        const std::string tag = section.substr(10);
        if (tag.size() != 1 || tag[0] < '1' || tag[0] > '3') {
            throw ConfigError(line, section, "unknown section");
        }
        const auto i = static_cast<std::size_t>(tag[0] - '1');
        if (key == "lambda") {
            m.model.lambda[i] = parse_double(value, line, field);
        } else if (key == "c") {
            m.model.c[i] = parse_double(value, line, field);
        } else if (key == "sigma") {
            m.model.sigma[i] = parse_double(value, line, field);
        } else {
            unknown();
        }
        return;
    }
    if (section == "sim") {
        auto& s = m.sim;
        if (key == "dt") {
            s.dt = parse_double(value, line, field);
        } else if (key == "horizon") {
            s.horizon = parse_double(value, line, field);
        } else if (key == "burn_in") {
            s.burn_in = parse_double(value, line, field);
        } else if (key == "seed") {
            s.seed = parse_int<std::uint64_t>(value, line, field);
        } else if (key == "replicas") {
            s.replicas = parse_int<int>(value, line, field);
        } else if (key == "threads") {
            s.threads = parse_int<int>(value, line, field);
        } else if (key == "batch_time") {
            s.batch_time = parse_double(value, line, field);
        } else if (key == "grid_step") {
            if (value == "auto") {
                m.grid_step.reset();
            } else {
                m.grid_step = parse_double(value, line, field);
            }
        } else if (key == "grid_count") {
            m.grid_count = parse_int<std::size_t>(value, line, field);
        } else if (key == "joint_bins") {
            s.joint_bins = parse_int<int>(value, line, field);
        } else if (key == "joint_max") {
            if (value == "auto") {
                m.joint_max.reset();
            } else {
                m.joint_max = parse_vec3(value, line, field);
            }
        } else if (key == "boundary_weight") {
            if (value == "auto") {
                m.boundary_weight.reset();
            } else {
                m.boundary_weight = parse_vec3(value, line, field);
            }
        } else {
            unknown();
        }
        return;
    }
    if (section == "fit") {
        auto& f = m.fit;
        if (key == "window_lower") {
            f.window_lower = parse_double(value, line, field);
        } else if (key == "window_upper") {
            f.window_upper = parse_double(value, line, field);
        } else if (key == "dependence_tail_probs") {
            f.dependence_tail_probs = parse_list(value, line, field);
        } else if (key == "factorization_tail_probs") {
            f.factorization_tail_probs = parse_list(value, line, field);
        } else if (key == "factorization_target") {
            f.factorization_target = parse_double(value, line, field);
        } else if (key == "gumbel_block_time") {
            f.gumbel_block_time = parse_double(value, line, field);
        } else if (key == "gumbel_blocks") {
            f.gumbel_blocks = parse_int<int>(value, line, field);
        } else {
            unknown();
        }
        return;
    }
    if (section == "output") {
        if (key == "dir") {
            m.output_dir = value;
        } else if (key == "tool_version") {
            m.tool_version = value;
        } else {
            unknown();
        }
        return;
    }
    throw ConfigError(line, section, "unknown section");
}

std::string body_text(const RunManifest& m, bool with_output, bool with_threads = true) {
    std::string out;
    auto kv = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
    out += "[model]\n";
    kv("mode", to_string(m.mode));
    for (int i = 0; i < 3; ++i) {
        out += "\n[model.node" + std::to_string(i + 1) + "]\n";
        kv("lambda", format_double(m.model.lambda[i]));
        kv("c", format_double(m.model.c[i]));
        kv("sigma", format_double(m.model.sigma[i]));
    }
    const auto& s = m.sim;
    out += "\n[sim]\n";
    kv("dt", format_double(s.dt));
    kv("horizon", format_double(s.horizon));
    kv("burn_in", format_double(s.burn_in));
    kv("seed", std::to_string(s.seed));
    kv("replicas", std::to_string(s.replicas));
    if (with_threads) kv("threads", std::to_string(s.threads));
    kv("batch_time", format_double(s.batch_time));
    kv("grid_step", m.grid_step ? format_double(*m.grid_step) : "auto");
    kv("grid_count", std::to_string(m.grid_count));
    kv("joint_bins", std::to_string(s.joint_bins));
    kv("joint_max", m.joint_max ? join(*m.joint_max) : "auto");
    kv("boundary_weight", m.boundary_weight ? join(*m.boundary_weight) : "auto");
    const auto& f = m.fit;
    out += "\n[fit]\n";
    kv("window_lower", format_double(f.window_lower));
    kv("window_upper", format_double(f.window_upper));
    kv("dependence_tail_probs", join(f.dependence_tail_probs));
    kv("factorization_tail_probs", join(f.factorization_tail_probs));
    kv("factorization_target", format_double(f.factorization_target));
    kv("gumbel_block_time", format_double(f.gumbel_block_time));
    kv("gumbel_blocks", std::to_string(f.gumbel_blocks));
    if (with_output) {
        out += "\n[output]\n";
        kv("dir", m.output_dir);
        kv("tool_version", m.tool_version);
    }
    return out;
}

}  // namespace

bool operator==(const RunManifest& a, const RunManifest& b) {
    const auto& x = a.sim;
    const auto& y = b.sim;
    return a.model == b.model && a.mode == b.mode && x.dt == y.dt && x.horizon == y.horizon &&
           x.burn_in == y.burn_in && x.seed == y.seed && x.replicas == y.replicas &&
           x.threads == y.threads && x.batch_time == y.batch_time && a.grid_step == b.grid_step &&
           a.grid_count == b.grid_count && x.joint_bins == y.joint_bins && a.joint_max == b.joint_max &&
           a.boundary_weight == b.boundary_weight && a.fit == b.fit &&
           a.output_dir == b.output_dir && a.tool_version == b.tool_version;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

RunManifest parse(const std::string& text) {
    RunManifest m;
    std::string section;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        const auto hash = s.find_first_of("#;");
        if (hash != std::string::npos) s.erase(hash);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(line, "", "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty()) throw ConfigError(line, "", "empty section name");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(line, "", "expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError(line, "", "empty key");
        if (section.empty()) throw ConfigError(line, key, "key outside any section");
        const std::string field = section + "." + key;
        if (!seen.insert(field).second) throw ConfigError(line, field, "duplicate key");
        set_field(m, section, key, value, line);
    }
    return m;
}

RunManifest load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string to_text(const RunManifest& manifest) { return body_text(manifest, true); }

void save(const RunManifest& manifest, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << to_text(manifest);
}

void apply_override(RunManifest& manifest, const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.rfind('.', eq);
    if (eq == std::string::npos || dot == std::string::npos) {
        throw ConfigError(0, assignment, "override must look like section.key=value");
    }
    const std::string section = trim(assignment.substr(0, dot));
    const std::string key = trim(assignment.substr(dot + 1, eq - dot - 1));
    const std::string value = trim(assignment.substr(eq + 1));
    set_field(manifest, section, key, value, 0);
}

std::string effective_output_dir(const RunManifest& manifest) {
    if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
    return manifest.output_dir;
}

std::uint64_t manifest_hash(const RunManifest& manifest) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : body_text(manifest, false, false) + "tool_version=" + manifest.tool_version) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string manifest_hash_hex(const RunManifest& manifest) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(manifest_hash(manifest)));
    return buf;
}

double rate_bound(const ModelParams& params, int node) {
    double lam = 0.0;
    double var = 0.0;
    for (int i = 0; i < node; ++i) {
        lam += params.lambda[i];
        var += params.sigma[i] * params.sigma[i];
    }
    return 2.0 * (params.c[node - 1] - lam) / var;
}

sim::SimConfig resolved_sim(const RunManifest& manifest) {
    sim::SimConfig s = manifest.sim;
    Vec3 bound{};
    for (int k = 1; k <= 3; ++k) bound[k - 1] = rate_bound(manifest.model, k);
    const double min_bound = std::min({bound[0], bound[1], bound[2]});
    if (!(min_bound > 0.0)) throw UnstableModel("cannot size the level grid of an unstable model");
    try {
        s.grid = sim::LevelGrid::uniform(manifest.grid_step.value_or(0.01 / min_bound),
                                         manifest.grid_count);
    } catch (const InvalidParameter& e) {
        throw ConfigError(0, "sim.grid_step", e.what());
    }
    if (manifest.joint_max) {
        s.joint_max = *manifest.joint_max;
    } else {
        for (int k = 0; k < 3; ++k) s.joint_max[k] = 10.0 / bound[k];
    }
    if (manifest.boundary_weight) {
        s.boundary_weight = *manifest.boundary_weight;
    } else {
        const auto& p = manifest.model;
        s.boundary_weight = {0.0, 0.0, 2.0 * (p.c[2] - p.lambda[2] - p.c[1]) / (p.sigma[2] * p.sigma[2])};
    }
    return s;
}

RunManifest set_a() {
    RunManifest m;
    m.model = {{1.0, 0.5, 0.5}, {2.0, 3.0, 4.0}, {1.0, 1.0, 1.0}};
    m.sim.dt = 1e-3;
    m.sim.horizon = 1e5;
    m.sim.burn_in = 1e3;
    m.sim.replicas = 4;
    return m;
}

RunManifest set_b() {
    RunManifest m = set_a();
    m.model.c[2] = 3.6;
    m.model.sigma[2] = 3.0;
    return m;
}

}  // namespace tandem::config
