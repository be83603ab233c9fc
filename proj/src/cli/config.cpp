#include "kickdyn/cli.hpp"
#include "kickdyn/units.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <type_traits>

namespace kickdyn::cli {

std::string to_string(Model m)
{
    switch (m) {
    case Model::atom1d: return "atom1d";
    case Model::morse1d: return "morse1d";
    case Model::h2plus: return "h2plus";
    }
    return "?";
}

ConfigError::ConfigError(const std::string& key, int line, const std::string& message)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         (key.empty() ? std::string() : key + ": ") + message),
      key_(key), line_(line)
{
}

h2plus::RelaxOptions H2PlusConfig::default_relax()
{
    h2plus::RelaxOptions r;
    r.dt_coarse = 0.5;
    r.coarse_tol = 1e-7;
    r.prerelax_z_points = 256;
    r.dt_imag = 0.2;
    r.tol = 2e-7;
    r.r_width = 0.32;
    return r;
}

double SimConfig::final_time_au() const { return units::fs_to_au(run.final_time_fs); }

shotnoise::NoiseParams SimConfig::noise_params(std::uint64_t seed) const
{
    shotnoise::NoiseParams p;
    p.gamma_mean = noise.gamma_mean;
    p.dt_mean = noise.spacing * units::kElectronicPeriod;
    p.horizon = final_time_au();
    p.seed = seed;
    return p;
}

ensemble::EnsembleSpec SimConfig::ensemble_spec() const
{
    ensemble::EnsembleSpec s;
    s.n_realizations = ensemble.realizations;
    s.master_seed = ensemble.master_seed;
    s.workers = ensemble.workers;
    return s;
}

namespace {

using Lines = std::map<std::string, int>;

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

static_assert(std::is_same_v<std::size_t, std::uint64_t>);

// One mapping node: typed lookups by key, then finish() rejects whatever
// was not looked up.
class Section {
public:
    Section(const YAML::Node& node, std::string path, Lines& lines) : node_(node), path_(std::move(path)), lines_(lines)
    {
        if (!node_ || node_.IsNull()) return;
        if (!node_.IsMap()) throw ConfigError(path_, line_of(node_), "expected a mapping");
        std::set<std::string> seen;
        for (const auto& kv : node_) {
            const std::string key = kv.first.as<std::string>();
            if (!seen.insert(key).second) throw ConfigError(full(key), line_of(kv.first), "duplicate key");
        }
    }

    bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }

    Section child(const std::string& key)
    {
        used_.insert(key);
        YAML::Node n = has(key) ? node_[key] : YAML::Node();
        if (n && !n.IsNull()) lines_[full(key)] = line_of(n);
        return Section(n, full(key), lines_);
    }

    void get(const std::string& key, double& out)
    {
        const auto found = fetch(key);
        if (!found) return;
        const YAML::Node& n = *found;
        const std::string s = scalar(key, n);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size())
            throw ConfigError(full(key), line_of(n), "expected a number, got '" + s + "'");
        out = v;
    }

    void get(const std::string& key, std::uint64_t& out)
    {
        const auto found = fetch(key);
        if (!found) return;
        const YAML::Node& n = *found;
        const std::string s = scalar(key, n);
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size())
            throw ConfigError(full(key), line_of(n), "expected a non-negative integer, got '" + s + "'");
        out = v;
    }

    void get(const std::string& key, bool& out)
    {
        const auto found = fetch(key);
        if (!found) return;
        const YAML::Node& n = *found;
        const std::string s = scalar(key, n);
        if (s == "true") out = true;
        else if (s == "false") out = false;
        else throw ConfigError(full(key), line_of(n), "expected true or false, got '" + s + "'");
    }

    void get(const std::string& key, std::string& out)
    {
        const auto found = fetch(key);
        if (!found) return;
        const YAML::Node& n = *found;
        out = scalar(key, n);
    }

    void get(const std::string& key, std::vector<double>& out)
    {
        const auto found = fetch(key);
        if (!found) return;
        const YAML::Node& n = *found;
        if (!n.IsSequence()) throw ConfigError(full(key), line_of(n), "expected a list of numbers");
        out.clear();
        for (std::size_t i = 0; i < n.size(); ++i) {
            const YAML::Node e = n[i];
            if (!e.IsScalar()) throw ConfigError(full(key), line_of(e), "expected a list of numbers");
            const std::string s = e.Scalar();
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || ptr != s.data() + s.size())
                throw ConfigError(full(key), line_of(e), "expected a number, got '" + s + "'");
            out.push_back(v);
        }
    }

    void finish() const
    {
        if (!node_ || node_.IsNull()) return;
        for (const auto& kv : node_) {
            const std::string key = kv.first.as<std::string>();
            if (!used_.count(key)) throw ConfigError(full(key), line_of(kv.first), "unknown key");
        }
    }

private:
    std::string full(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    std::optional<YAML::Node> fetch(const std::string& key)
    {
        used_.insert(key);
        if (!has(key)) return std::nullopt;
        YAML::Node n = node_[key];
        lines_[full(key)] = line_of(n);
        if (n.IsNull()) throw ConfigError(full(key), line_of(n), "missing value");
        return n;
    }

    std::string scalar(const std::string& key, const YAML::Node& n) const
    {
        if (!n.IsScalar()) throw ConfigError(full(key), line_of(n), "expected a scalar");
        return n.Scalar();
    }

    YAML::Node node_;
    std::string path_;
    Lines& lines_;
    std::set<std::string> used_;
};

void read_grid1d(Section& s, Grid1DConfig& g)
{
    auto grid = s.child("grid");
    grid.get("points", g.points);
    grid.get("x_min", g.x_min);
    grid.get("x_max", g.x_max);
    grid.finish();
    auto abs = s.child("absorber");
    abs.get("fraction", g.absorber_fraction);
    abs.get("strength", g.absorber_strength);
    abs.finish();
    auto relax = s.child("relax");
    relax.get("dt", g.relax_dt);
    relax.get("tol", g.relax_tol);
    relax.finish();
}

SimConfig read(const YAML::Node& root, Lines& lines)
{
    SimConfig c;
    Section top(root, "", lines);

    std::string model = to_string(c.model);
    top.get("model", model);
    if (model == "atom1d") c.model = Model::atom1d;
    else if (model == "morse1d") c.model = Model::morse1d;
    else if (model == "h2plus") c.model = Model::h2plus;
    else throw ConfigError("model", lines["model"], "expected atom1d, morse1d or h2plus, got '" + model + "'");

    {
        auto s = top.child("noise");
        s.get("gamma_mean", c.noise.gamma_mean);
        s.get("spacing", c.noise.spacing);
        s.finish();
    }
    {
        auto s = top.child("run");
        s.get("final_time_fs", c.run.final_time_fs);
        s.get("dt", c.run.dt);
        s.get("record_every", c.run.record_every);
        s.finish();
    }
    {
        auto s = top.child("ensemble");
        s.get("realizations", c.ensemble.realizations);
        s.get("master_seed", c.ensemble.master_seed);
        s.get("workers", c.ensemble.workers);
        s.finish();
    }
    {
        auto s = top.child("output");
        s.get("directory", c.output.directory);
        s.finish();
    }

    if (root.IsMap())
        for (const auto& kv : root) {
            const std::string key = kv.first.as<std::string>();
            for (Model other : {Model::atom1d, Model::morse1d, Model::h2plus})
                if (other != c.model && key == to_string(other))
                    throw ConfigError(key, line_of(kv.first), "section does not apply to model " + to_string(c.model));
        }

    if (c.model == Model::atom1d) {
        auto s = top.child("atom1d");
        s.get("softening", c.atom1d.params.a);
        read_grid1d(s, c.atom1d.grid);
        s.finish();
    } else if (c.model == Model::morse1d) {
        auto s = top.child("morse1d");
        s.get("dissociation_energy", c.morse1d.params.D);
        s.get("alpha", c.morse1d.params.alpha);
        s.get("mu0", c.morse1d.params.mu0);
        s.get("reduced_mass", c.morse1d.params.reduced_mass);
        read_grid1d(s, c.morse1d.grid);
        s.finish();
    } else {
        auto s = top.child("h2plus");
        auto& h = c.h2plus;
        s.get("proton_mass", h.params.proton_mass);
        auto grid = s.child("grid");
        grid.get("z_points", h.geometry.z_points);
        grid.get("z_min", h.geometry.z_min);
        grid.get("z_max", h.geometry.z_max);
        grid.get("r_points", h.geometry.r_points);
        grid.get("r_min", h.geometry.r_min);
        grid.get("r_max", h.geometry.r_max);
        grid.get("bessel_modes", h.geometry.bessel_modes);
        grid.get("rho_max", h.geometry.rho_max);
        grid.finish();
        s.get("z_ionization", h.geometry.z_ionization);
        s.get("r_dissociation", h.geometry.r_dissociation);
        auto abs = s.child("absorber");
        abs.get("enabled", h.geometry.absorber.enabled);
        abs.get("z_onset", h.geometry.absorber.z_onset);
        abs.get("z_strength", h.geometry.absorber.z_strength);
        abs.get("r_onset", h.geometry.absorber.r_onset);
        abs.get("r_strength", h.geometry.absorber.r_strength);
        abs.finish();
        auto relax = s.child("relax");
        relax.get("dt_imag", h.relax.dt_imag);
        relax.get("tol", h.relax.tol);
        relax.get("dt_coarse", h.relax.dt_coarse);
        relax.get("coarse_tol", h.relax.coarse_tol);
        relax.get("prerelax_z_points", h.relax.prerelax_z_points);
        relax.get("check_every", h.relax.check_every);
        relax.get("max_steps", h.relax.max_steps);
        relax.get("r_center", h.relax.r_center);
        relax.get("r_width", h.relax.r_width);
        relax.get("electron_width", h.relax.electron_width);
        relax.finish();
        s.finish();
    }

    {
        auto s = top.child("sweep");
        s.get("axis", c.sweep.axis);
        s.get("values", c.sweep.values);
        s.finish();
    }
    {
        auto s = top.child("validate_noise");
        auto& v = c.validate_noise;
        s.get("samples", v.samples);
        s.get("horizon", v.horizon);
        s.get("bin_width", v.bin_width);
        s.get("max_lag_bins", v.max_lag_bins);
        s.get("spectrum_bins", v.spectrum_bins);
        s.get("omega_min", v.omega_min);
        s.get("omega_max", v.omega_max);
        s.get("omega_points", v.omega_points);
        s.get("mean_tolerance", v.mean_tolerance);
        s.get("background_sigmas", v.background_sigmas);
        s.get("flat_tolerance", v.flat_tolerance);
        s.finish();
    }
    top.finish();
    return c;
}

class Checker {
public:
    explicit Checker(const Lines& lines) : lines_(lines) {}

    void operator()(bool ok, const std::string& key, const std::string& message) const
    {
        if (ok) return;
        const auto it = lines_.find(key);
        throw ConfigError(key, it == lines_.end() ? 0 : it->second, message);
    }

    void positive(double v, const std::string& key) const
    {
        (*this)(std::isfinite(v) && v > 0.0, key, "must be positive and finite");
    }
    void non_negative(double v, const std::string& key) const
    {
        (*this)(std::isfinite(v) && v >= 0.0, key, "must be non-negative and finite");
    }
    void finite(double v, const std::string& key) const { (*this)(std::isfinite(v), key, "must be finite"); }

private:
    const Lines& lines_;
};

void check_grid1d(const Checker& check, const Grid1DConfig& g, const std::string& p)
{
    check(g.points >= 16, p + ".grid.points", "must be at least 16");
    check.finite(g.x_min, p + ".grid.x_min");
    check.finite(g.x_max, p + ".grid.x_max");
    check(g.x_max > g.x_min, p + ".grid.x_max", "must exceed x_min");
    check(std::isfinite(g.absorber_fraction) && g.absorber_fraction >= 0.0 && g.absorber_fraction < 0.5,
          p + ".absorber.fraction", "must lie in [0, 0.5)");
    check.non_negative(g.absorber_strength, p + ".absorber.strength");
    check.positive(g.relax_dt, p + ".relax.dt");
    check.positive(g.relax_tol, p + ".relax.tol");
}

void check_all(const SimConfig& c, const Lines& lines)
{
    const Checker check(lines);
    check.positive(c.noise.gamma_mean, "noise.gamma_mean");
    check.positive(c.noise.spacing, "noise.spacing");
    check.positive(c.run.final_time_fs, "run.final_time_fs");
    check.positive(c.run.dt, "run.dt");
    check(c.run.record_every >= 1, "run.record_every", "must be at least 1");
    check(c.ensemble.realizations >= 1, "ensemble.realizations", "must be at least 1");
    check(c.ensemble.workers >= 1, "ensemble.workers", "must be at least 1");
    check(!c.output.directory.empty(), "output.directory", "must not be empty");

    if (c.model == Model::atom1d) {
        check.positive(c.atom1d.params.a, "atom1d.softening");
        check_grid1d(check, c.atom1d.grid, "atom1d");
    } else if (c.model == Model::morse1d) {
        const auto& m = c.morse1d.params;
        check.positive(m.D, "morse1d.dissociation_energy");
        check.positive(m.alpha, "morse1d.alpha");
        check.positive(m.mu0, "morse1d.mu0");
        check.positive(m.reduced_mass, "morse1d.reduced_mass");
        check(2.0 * m.D / m.omega() > 1.0, "morse1d.dissociation_energy", "parameters support no bound state");
        check_grid1d(check, c.morse1d.grid, "morse1d");
    } else {
        const auto& h = c.h2plus;
        const auto& g = h.geometry;
        check.positive(h.params.proton_mass, "h2plus.proton_mass");
        check(g.z_points >= 8, "h2plus.grid.z_points", "must be at least 8");
        check(g.r_points >= 4, "h2plus.grid.r_points", "must be at least 4");
        check(g.bessel_modes >= 1, "h2plus.grid.bessel_modes", "must be at least 1");
        check.finite(g.z_min, "h2plus.grid.z_min");
        check.finite(g.z_max, "h2plus.grid.z_max");
        check(g.z_max > g.z_min, "h2plus.grid.z_max", "must exceed z_min");
        check.positive(g.r_min, "h2plus.grid.r_min");
        check.finite(g.r_max, "h2plus.grid.r_max");
        check(g.r_max > g.r_min, "h2plus.grid.r_max", "must exceed r_min");
        check.positive(g.rho_max, "h2plus.grid.rho_max");
        check(std::isfinite(g.z_ionization) && g.z_ionization > 0.0 && g.z_ionization < g.z_max,
              "h2plus.z_ionization", "must lie in (0, z_max)");
        check(std::isfinite(g.r_dissociation) && g.r_dissociation > g.r_min && g.r_dissociation < g.r_max,
              "h2plus.r_dissociation", "must lie in (r_min, r_max)");
        const auto& a = g.absorber;
        check(std::isfinite(a.z_onset) && a.z_onset > 0.0 && a.z_onset < g.z_max && -a.z_onset > g.z_min,
              "h2plus.absorber.z_onset", "must lie inside the z grid");
        check.non_negative(a.z_strength, "h2plus.absorber.z_strength");
        check(std::isfinite(a.r_onset) && a.r_onset > g.r_min && a.r_onset < g.r_max, "h2plus.absorber.r_onset",
              "must lie inside the R grid");
        check.non_negative(a.r_strength, "h2plus.absorber.r_strength");
        const auto& r = h.relax;
        check.positive(r.dt_imag, "h2plus.relax.dt_imag");
        check.positive(r.tol, "h2plus.relax.tol");
        check.non_negative(r.dt_coarse, "h2plus.relax.dt_coarse");
        check.positive(r.coarse_tol, "h2plus.relax.coarse_tol");
        const auto pz = r.prerelax_z_points;
        check(pz == 0 || pz >= g.z_points || (pz % 2 == 0 && pz >= 16 && g.z_points % pz == 0),
              "h2plus.relax.prerelax_z_points", "must be 0, at least z_points, or an even divisor of z_points >= 16");
        check(r.check_every >= 1, "h2plus.relax.check_every", "must be at least 1");
        check(r.max_steps >= 1, "h2plus.relax.max_steps", "must be at least 1");
        check(std::isfinite(r.r_center) && r.r_center > g.r_min && r.r_center < g.r_max, "h2plus.relax.r_center",
              "must lie inside the R grid");
        check.positive(r.r_width, "h2plus.relax.r_width");
        check.positive(r.electron_width, "h2plus.relax.electron_width");
    }

    check(c.sweep.axis == "spacing" || c.sweep.axis == "gamma_mean", "sweep.axis", "must be spacing or gamma_mean");
    for (double v : c.sweep.values) check.positive(v, "sweep.values");

    const auto& v = c.validate_noise;
    check(v.samples >= 1000, "validate_noise.samples", "must be at least 1000");
    check.positive(v.horizon, "validate_noise.horizon");
    check.positive(v.bin_width, "validate_noise.bin_width");
    check(v.bin_width < v.horizon, "validate_noise.bin_width", "must be smaller than the horizon");
    check(v.max_lag_bins >= 2, "validate_noise.max_lag_bins", "must be at least 2");
    check(v.spectrum_bins >= 16, "validate_noise.spectrum_bins", "must be at least 16");
    check.positive(v.omega_min, "validate_noise.omega_min");
    check(std::isfinite(v.omega_max) && v.omega_max >= v.omega_min, "validate_noise.omega_max",
          "must be at least omega_min");
    check(v.omega_points >= 1, "validate_noise.omega_points", "must be at least 1");
    check.positive(v.mean_tolerance, "validate_noise.mean_tolerance");
    check.positive(v.background_sigmas, "validate_noise.background_sigmas");
    check.positive(v.flat_tolerance, "validate_noise.flat_tolerance");
}

std::string num(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string quoted(const std::string& s)
{
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch;
    }
    return out + "\"";
}

class Writer {
public:
    void section(const std::string& name)
    {
        out_ << std::string(2 * depth_, ' ') << name << ":\n";
        ++depth_;
    }
    void end() { --depth_; }
    void value(const std::string& key, const std::string& text)
    {
        out_ << std::string(2 * depth_, ' ') << key << ": " << text << "\n";
    }
    void value(const std::string& key, double v) { value(key, num(v)); }
    void value(const std::string& key, std::uint64_t v) { value(key, std::to_string(v)); }
    void value(const std::string& key, bool v) { value(key, std::string(v ? "true" : "false")); }
    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
    int depth_ = 0;
};

void write_grid1d(Writer& w, const Grid1DConfig& g)
{
    w.section("grid");
    w.value("points", std::uint64_t{g.points});
    w.value("x_min", g.x_min);
    w.value("x_max", g.x_max);
    w.end();
    w.section("absorber");
    w.value("fraction", g.absorber_fraction);
    w.value("strength", g.absorber_strength);
    w.end();
    w.section("relax");
    w.value("dt", g.relax_dt);
    w.value("tol", g.relax_tol);
    w.end();
}

} // namespace

void validate(const SimConfig& config) { check_all(config, Lines{}); }

SimConfig parse_config(const std::string& text)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError("", e.mark.line >= 0 ? e.mark.line + 1 : 0, e.msg);
    }
    Lines lines;
    SimConfig c;
    try {
        c = read(root, lines);
    } catch (const YAML::Exception& e) {
        throw ConfigError("", e.mark.line >= 0 ? e.mark.line + 1 : 0, e.msg);
    }
    check_all(c, lines);
    return c;
}

SimConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("", 0, "cannot read " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string serialize_config(const SimConfig& c)
{
    Writer w;
    w.value("model", to_string(c.model));
    w.section("noise");
    w.value("gamma_mean", c.noise.gamma_mean);
    w.value("spacing", c.noise.spacing);
    w.end();
    w.section("run");
    w.value("final_time_fs", c.run.final_time_fs);
    w.value("dt", c.run.dt);
    w.value("record_every", std::uint64_t{c.run.record_every});
    w.end();
    w.section("ensemble");
    w.value("realizations", std::uint64_t{c.ensemble.realizations});
    w.value("master_seed", c.ensemble.master_seed);
    w.value("workers", std::uint64_t{c.ensemble.workers});
    w.end();
    w.section("output");
    w.value("directory", quoted(c.output.directory));
    w.end();

    if (c.model == Model::atom1d) {
        w.section("atom1d");
        w.value("softening", c.atom1d.params.a);
        write_grid1d(w, c.atom1d.grid);
        w.end();
    } else if (c.model == Model::morse1d) {
        const auto& m = c.morse1d.params;
        w.section("morse1d");
        w.value("dissociation_energy", m.D);
        w.value("alpha", m.alpha);
        w.value("mu0", m.mu0);
        w.value("reduced_mass", m.reduced_mass);
        write_grid1d(w, c.morse1d.grid);
        w.end();
    } else {
        const auto& h = c.h2plus;
        const auto& g = h.geometry;
        w.section("h2plus");
        w.value("proton_mass", h.params.proton_mass);
        w.section("grid");
        w.value("z_points", std::uint64_t{g.z_points});
        w.value("z_min", g.z_min);
        w.value("z_max", g.z_max);
        w.value("r_points", std::uint64_t{g.r_points});
        w.value("r_min", g.r_min);
        w.value("r_max", g.r_max);
        w.value("bessel_modes", std::uint64_t{g.bessel_modes});
        w.value("rho_max", g.rho_max);
        w.end();
        w.value("z_ionization", g.z_ionization);
        w.value("r_dissociation", g.r_dissociation);
        w.section("absorber");
        w.value("enabled", g.absorber.enabled);
        w.value("z_onset", g.absorber.z_onset);
        w.value("z_strength", g.absorber.z_strength);
        w.value("r_onset", g.absorber.r_onset);
        w.value("r_strength", g.absorber.r_strength);
        w.end();
        w.section("relax");
        w.value("dt_imag", h.relax.dt_imag);
        w.value("tol", h.relax.tol);
        w.value("dt_coarse", h.relax.dt_coarse);
        w.value("coarse_tol", h.relax.coarse_tol);
        w.value("prerelax_z_points", std::uint64_t{h.relax.prerelax_z_points});
        w.value("check_every", std::uint64_t{h.relax.check_every});
        w.value("max_steps", std::uint64_t{h.relax.max_steps});
        w.value("r_center", h.relax.r_center);
        w.value("r_width", h.relax.r_width);
        w.value("electron_width", h.relax.electron_width);
        w.end();
        w.end();
    }

    w.section("sweep");
    w.value("axis", c.sweep.axis);
    std::string list = "[";
    for (std::size_t i = 0; i < c.sweep.values.size(); ++i) list += (i ? ", " : "") + num(c.sweep.values[i]);
    w.value("values", list + "]");
    w.end();

    const auto& v = c.validate_noise;
    w.section("validate_noise");
    w.value("samples", std::uint64_t{v.samples});
    w.value("horizon", v.horizon);
    w.value("bin_width", v.bin_width);
    w.value("max_lag_bins", std::uint64_t{v.max_lag_bins});
    w.value("spectrum_bins", std::uint64_t{v.spectrum_bins});
    w.value("omega_min", v.omega_min);
    w.value("omega_max", v.omega_max);
    w.value("omega_points", std::uint64_t{v.omega_points});
    w.value("mean_tolerance", v.mean_tolerance);
    w.value("background_sigmas", v.background_sigmas);
    w.value("flat_tolerance", v.flat_tolerance);
    w.end();
    return w.str();
}

SweepConfig parse_axis(const std::string& text)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("--axis", 0, "expected name:v1,v2,...");
    SweepConfig s;
    s.axis = text.substr(0, colon);
    if (s.axis == "gamma") s.axis = "gamma_mean";
    if (s.axis != "spacing" && s.axis != "gamma_mean")
        throw ConfigError("--axis", 0, "unknown axis '" + s.axis + "' (spacing or gamma_mean)");
    std::stringstream list(text.substr(colon + 1));
    std::string item;
    while (std::getline(list, item, ',')) {
        while (!item.empty() && item.front() == ' ') item.erase(item.begin());
        while (!item.empty() && item.back() == ' ') item.pop_back();
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || ec != std::errc() || ptr != item.data() + item.size() || !(v > 0.0) || !std::isfinite(v))
            throw ConfigError("--axis", 0, "bad axis value '" + item + "'");
        s.values.push_back(v);
    }
    if (s.values.empty()) throw ConfigError("--axis", 0, "no axis values");
    return s;
}

} // namespace kickdyn::cli
