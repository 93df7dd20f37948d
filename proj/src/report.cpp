// SPDX-License-Identifier: Apache-2.0
#include "tandem_tail/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tandem_tail/errors.hpp"

namespace tandem::report {

namespace {

using config::format_double;

std::string hash_line(const std::string& hash) { return "# manifest_hash=" + hash + "\n"; }

std::string num(double x) { return std::isfinite(x) ? format_double(x) : std::string(); }

void write_vec3(JsonWriter& w, const Vec3& v) {
    w.begin_array();
    for (double x : v) w.value(x);
    w.end_array();
}

void write_prediction(JsonWriter& w, const kernel::AsymptoticPrediction& p) {
    w.begin_object();
    w.key("node").value(p.node);
    w.key("alpha").value(p.alpha);
    w.key("mu").value(p.mu);
    w.key("regime").value(kernel::to_string(p.regime));
    w.end_object();
}

}  // namespace

void JsonWriter::separate() {
    if (after_key_) {
        after_key_ = false;
        return;
    }
    if (!first_.empty()) {
        if (!first_.back()) out_ += ",";
        first_.back() = false;
    }
}

JsonWriter& JsonWriter::begin_object() {
    separate();
    out_ += "{";
    first_.push_back(true);
    return *this;
}

JsonWriter& JsonWriter::end_object() {
    first_.pop_back();
    out_ += "}";
    return *this;
}

JsonWriter& JsonWriter::begin_array() {
    separate();
    out_ += "[";
    first_.push_back(true);
    return *this;
}

JsonWriter& JsonWriter::end_array() {
    first_.pop_back();
    out_ += "]";
    return *this;
}

JsonWriter& JsonWriter::key(const std::string& k) {
    value(k);
    out_ += ":";
    after_key_ = true;
    return *this;
}

JsonWriter& JsonWriter::value(double v) {
    separate();
    out_ += std::isfinite(v) ? format_double(v) : "null";
    return *this;
}

JsonWriter& JsonWriter::value(long long v) {
    separate();
    out_ += std::to_string(v);
    return *this;
}

JsonWriter& JsonWriter::value(bool v) {
    separate();
    out_ += v ? "true" : "false";
    return *this;
}

JsonWriter& JsonWriter::value(const std::string& v) {
    separate();
    out_ += '"';
    for (unsigned char ch : v) {
        switch (ch) {
            case '"': out_ += "\\\""; break;
            case '\\': out_ += "\\\\"; break;
            case '\n': out_ += "\\n"; break;
            case '\t': out_ += "\\t"; break;
            case '\r': out_ += "\\r"; break;
            default:
                if (ch < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                    out_ += buf;
                } else {
                    out_ += static_cast<char>(ch);
                }
        }
    }
    out_ += '"';
    return *this;
}

JsonWriter& JsonWriter::null() {
    separate();
    out_ += "null";
    return *this;
}

std::string kernel_report_csv(const kernel::KernelReport& report, const std::string& hash) {
    std::string out = hash_line(hash) + "node,alpha,mu,regime,z_min,z_max,z_star\n";
    const auto& g = report.geometry;
    for (const auto& m : report.marginals) {
        out += std::to_string(m.node) + "," + format_double(m.alpha) + "," + format_double(m.mu) +
               "," + kernel::to_string(m.regime) + "," + format_double(g.z_min) + "," +
               format_double(g.z_max) + "," + (g.z_star ? format_double(*g.z_star) : "") + "\n";
    }
    return out;
}

std::string kernel_report_json(const kernel::KernelReport& report, const std::string& hash) {
    JsonWriter w;
    const auto& g = report.geometry;
    w.begin_object();
    w.key("schema_version").value(kSchemaVersion);
    w.key("manifest_hash").value(hash);
    w.key("geometry").begin_object();
    w.key("z_min").value(g.z_min);
    w.key("z_max").value(g.z_max);
    w.key("z_max_closed_form").value(g.z_max_closed_form);
    w.key("y_min").value(g.y_min);
    w.key("y_max").value(g.y_max);
    w.key("y_tilde_m").value(g.y_tilde_m);
    w.key("z_star_candidate").value(g.z_star_candidate);
    w.key("z_star");
    if (g.z_star) {
        w.value(*g.z_star);
    } else {
        w.null();
    }
    w.end_object();
    w.key("marginals").begin_array();
    for (const auto& m : report.marginals) write_prediction(w, m);
    w.end_array();
    w.key("boundary").begin_object();
    w.key("z0").value(report.boundary.z0);
    w.key("phi2_value").value(report.boundary.phi2_value);
    w.end_object();
    w.key("regulator_rates");
    write_vec3(w, report.regulator_rates);
    w.key("warnings").begin_array();
    for (const auto& s : report.warnings) w.value(s);
    w.end_array();
    w.end_object();
    return w.str() + "\n";
}

std::string ccdf_csv(const tails::Ccdf& ccdf, int node, const std::string& hash) {
    std::string out = hash_line(hash) + "level,node,exceedance_probability\n";
    const std::string n = std::to_string(node);
    for (std::size_t k = 0; k < ccdf.levels.size(); ++k) {
        out += format_double(ccdf.levels[k]) + "," + n + "," + format_double(ccdf.probabilities[k]) +
               "\n";
    }
    return out;
}

std::string dependence_csv(const tails::DependenceProfile& profile, const std::string& hash) {
    std::string out = hash_line(hash) + "level,pair,denominator_node,ratio\n";
    const std::string pair =
        std::to_string(profile.pair.first) + std::to_string(profile.pair.second);
    for (std::size_t k = 0; k < profile.levels.size(); ++k) {
        out += format_double(profile.levels[k]) + "," + pair + "," +
               std::to_string(profile.denominator_node) + "," +
               (profile.ratios[k] ? format_double(*profile.ratios[k]) : "") + "\n";
    }
    return out;
}

std::string simulation_json(const pipeline::Products& p) {
    JsonWriter w;
    w.begin_object();
    w.key("schema_version").value(kSchemaVersion);
    w.key("manifest_hash").value(config::manifest_hash_hex(p.manifest));
    w.key("steps").value(static_cast<long long>(p.acc.steps()));
    w.key("window_length").value(p.acc.window_length());
    w.key("regulator_rate");
    write_vec3(w, p.rates.rate);
    w.key("regulator_rate_half_width");
    write_vec3(w, p.rates.half_width);
    w.key("boundary_weight");
    write_vec3(w, p.sim.boundary_weight);
    w.key("boundary_transform_node2").value(p.boundary_transform);
    w.key("fits").begin_array();
    for (const auto& f : p.fits) {
        if (!f) {
            w.null();
            continue;
        }
        w.begin_object();
        w.key("node").value(f->node);
        w.key("alpha_hat").value(f->alpha_hat);
        w.key("stderr_alpha").value(f->stderr_alpha);
        w.key("intercept").value(f->intercept);
        w.key("window").begin_array().value(f->window.lo).value(f->window.hi).end_array();
        w.key("n_levels").value(static_cast<long long>(f->n_levels));
        w.end_object();
    }
    w.end_array();
    w.key("factorization").begin_array();
    for (const auto& pt : p.factorization) {
        w.begin_object();
        w.key("tail_prob").value(pt.tail_prob);
        w.key("thresholds");
        write_vec3(w, pt.thresholds);
        w.key("marginal");
        write_vec3(w, pt.marginal);
        w.key("joint").value(pt.joint);
        w.key("ratio");
        if (pt.ratio) {
            w.value(*pt.ratio);
        } else {
            w.null();
        }
        w.end_object();
    }
    w.end_array();
    w.key("gumbel_node1_sup_distance");
    if (p.gumbel_distance) {
        w.value(*p.gumbel_distance);
    } else {
        w.null();
    }
    w.end_object();
    return w.str() + "\n";
}

std::string verification_csv(const pipeline::VerificationReport& report) {
    std::string out = hash_line(report.manifest_hash) + "quantity,predicted,estimated,tolerance,pass\n";
    for (const auto& r : report.rows) {
        out += r.quantity + "," + num(r.predicted) + "," + num(r.estimated) + "," +
               num(r.tolerance) + "," + (r.pass ? "true" : "false") + "\n";
    }
    return out;
}

std::string verification_json(const pipeline::VerificationReport& report) {
    JsonWriter w;
    w.begin_object();
    w.key("schema_version").value(kSchemaVersion);
    w.key("manifest_hash").value(report.manifest_hash);
    w.key("all_pass").value(report.all_pass());
    w.key("rows").begin_array();
    for (const auto& r : report.rows) {
        w.begin_object();
        w.key("quantity").value(r.quantity);
        w.key("predicted").value(r.predicted);
        w.key("estimated").value(r.estimated);
        w.key("tolerance").value(r.tolerance);
        w.key("pass").value(r.pass);
        w.end_object();
    }
    w.end_array();
    w.end_object();
    return w.str() + "\n";
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
    std::filesystem::create_directories(dir);
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
}

void write_kernel_report(const std::string& dir, const kernel::KernelReport& report,
                         const std::string& hash) {
    write_file(dir, "kernel_report.csv", kernel_report_csv(report, hash));
    write_file(dir, "kernel_report.json", kernel_report_json(report, hash));
}

void write_simulation(const std::string& dir, const pipeline::Products& products) {
    const auto hash = config::manifest_hash_hex(products.manifest);
    for (int node = 1; node <= 3; ++node) {
        write_file(dir, "ccdf_" + std::to_string(node) + ".csv",
                   ccdf_csv(products.ccdf[node - 1], node, hash));
    }
    for (const auto& prof : products.dependence) {
        write_file(dir,
                   "dependence_" + std::to_string(prof.pair.first) +
                       std::to_string(prof.pair.second) + ".csv",
                   dependence_csv(prof, hash));
    }
    write_file(dir, "simulation.json", simulation_json(products));
}

void write_verification(const std::string& dir, const pipeline::VerificationReport& report) {
    write_file(dir, "verification.csv", verification_csv(report));
    write_file(dir, "verification.json", verification_json(report));
}

void write_manifest(const std::string& dir, const config::RunManifest& manifest) {
    write_file(dir, "manifest.ini", config::to_text(manifest));
}

}  // namespace tandem::report
