#include "nozzle/errors.hpp"
#include "nozzle/harness.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace nozzle {

namespace pt = boost::property_tree;

const char* to_string(Parametrization p) {
    return p == Parametrization::Angle ? "angle" : "spline";
}

std::vector<std::string> ExperimentConfig::violations() const {
    std::vector<std::string> v;
    const auto add = [&](const std::string& where, const std::vector<std::string>& items) {
        for (const auto& s : items) v.push_back(where + ": " + s);
    };
    add("geometry", dims.violations());
    add("cross_wlf", cross_wlf.violations());
    add("giesekus", giesekus.violations());
    add("solver", solver.violations());
    if (feeding_rates.empty()) v.push_back("experiment.feeding_rates must not be empty");
    for (double u : feeding_rates) {
        if (!(u > 0.0)) v.push_back("experiment.feeding_rates entries must be positive");
    }
    for (double d : outlet_diameters) {
        if (!(d > 0.0 && d < dims.d_in)) v.push_back("experiment.outlet_diameters entries must lie in (0, d_in)");
    }
    const auto angle_ok = [&](double a) { return a >= optimizer.alpha_lo && a <= optimizer.alpha_hi; };
    if (!(optimizer.alpha_lo >= kMinHalfAngleDeg && optimizer.alpha_hi <= kMaxHalfAngleDeg &&
          optimizer.alpha_lo < optimizer.alpha_hi)) {
        v.push_back("optimizer angle bounds must satisfy 5 <= alpha_lo < alpha_hi <= 90");
    }
    if (!angle_ok(alpha0)) v.push_back("experiment.alpha0 outside the angle bounds");
    if (!angle_ok(baseline_alpha)) v.push_back("experiment.baseline_alpha outside the angle bounds");
    if (multistart && !angle_ok(multistart_alpha)) v.push_back("experiment.multistart_alpha outside the angle bounds");
    for (double a : gallery_angles) {
        if (!(a >= kMinHalfAngleDeg && a <= kMaxHalfAngleDeg)) v.push_back("experiment.gallery_angles entries must lie in [5, 90]");
    }
    if (n_ctrl < 3) v.push_back("spline.n_ctrl must be at least 3");
    if (degree < 1 || static_cast<std::size_t>(degree) >= n_ctrl) v.push_back("spline.degree must lie in [1, n_ctrl)");
    if (!(T_wall > 0.0)) v.push_back("boundary.T_wall must be positive");
    if (!(T_in > 0.0)) v.push_back("boundary.T_in must be positive");
    if (!(solver.T_visc_floor > cross_wlf.wlf_pole())) v.push_back("solver.T_visc_floor must exceed the WLF pole");
    if (!(mesh.h > 0.0)) v.push_back("mesh.h must be positive");
    if (!(mesh.grading > 0.0 && mesh.grading <= 1.0)) v.push_back("mesh.grading must lie in (0, 1]");
    if (!(mesh.growth > 0.0)) v.push_back("mesh.growth must be positive");
    if (optimizer.budget < 1) v.push_back("optimizer.budget must be positive");
    if (workers < 1) v.push_back("experiment.workers must be at least 1");
    if (output_dir.empty()) v.push_back("experiment.output_dir must not be empty");
    return v;
}

namespace {

// Shortest text that reads back to the same double.
std::string fmt(double x) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string fmt_list(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + fmt(xs[i]);
    return out;
}

// Binds every key of the schema to a field, for reading and writing alike.
struct Field {
    std::function<void(const std::string&)> read;
    std::function<std::string()> write;
};
using Schema = std::map<std::string, std::map<std::string, Field>>;

double to_double(const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ParseError("not a number: '" + s + "'");
    }
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw ParseError("not a number: '" + s + "'");
    return v;
}

std::size_t to_count(const std::string& s) {
    const double v = to_double(s);
    if (v < 0.0 || v != std::floor(v)) throw ParseError("not a non-negative integer: '" + s + "'");
    return static_cast<std::size_t>(v);
}

bool to_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ParseError("not a boolean: '" + s + "'");
}

std::vector<double> to_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        out.push_back(to_double(item.substr(b)));
    }
    return out;
}

Field num(double& x) {
    return {[&x](const std::string& s) { x = to_double(s); }, [&x] { return fmt(x); }};
}
Field count(std::size_t& x) {
    return {[&x](const std::string& s) { x = to_count(s); }, [&x] { return std::to_string(x); }};
}
Field integer(int& x) {
    return {[&x](const std::string& s) { x = static_cast<int>(to_count(s)); }, [&x] { return std::to_string(x); }};
}
Field flag(bool& x) {
    return {[&x](const std::string& s) { x = to_bool(s); }, [&x] { return std::string(x ? "true" : "false"); }};
}
Field list(std::vector<double>& x) {
    return {[&x](const std::string& s) { x = to_list(s); }, [&x] { return fmt_list(x); }};
}
Field text(std::string& x) {
    return {[&x](const std::string& s) { x = s; }, [&x] { return x; }};
}

Schema schema(ExperimentConfig& c) {
    Schema s;
    auto& e = s["experiment"];
    e["name"] = text(c.name);
    e["model"] = {[&c](const std::string& v) {
                      if (v == "viscous") c.model = ModelKind::ViscousGnf;
                      else if (v == "viscoelastic") c.model = ModelKind::Viscoelastic;
                      else throw ParseError("model must be viscous or viscoelastic, got '" + v + "'");
                  },
                  [&c] { return std::string(to_string(c.model)); }};
    e["parametrization"] = {[&c](const std::string& v) {
                                if (v == "angle") c.parametrization = Parametrization::Angle;
                                else if (v == "spline") c.parametrization = Parametrization::Spline;
                                else throw ParseError("parametrization must be angle or spline, got '" + v + "'");
                            },
                            [&c] { return std::string(to_string(c.parametrization)); }};
    e["feeding_rates"] = list(c.feeding_rates);
    e["outlet_diameters"] = list(c.outlet_diameters);
    e["alpha0"] = num(c.alpha0);
    e["baseline_alpha"] = num(c.baseline_alpha);
    e["multistart"] = flag(c.multistart);
    e["multistart_alpha"] = num(c.multistart_alpha);
    e["gallery_angles"] = list(c.gallery_angles);
    e["output_dir"] = text(c.output_dir);
    e["seed"] = {[&c](const std::string& v) { c.seed = static_cast<unsigned>(to_count(v)); },
                 [&c] { return std::to_string(c.seed); }};
    e["workers"] = count(c.workers);

    auto& g = s["geometry"];
    g["L_total"] = num(c.dims.L_total);
    g["L_heat"] = num(c.dims.L_heat);
    g["L_out"] = num(c.dims.L_out);
    g["L_pressure"] = num(c.dims.L_pressure);
    g["d_in"] = num(c.dims.d_in);
    g["d_out"] = num(c.dims.d_out);

    auto& w = s["cross_wlf"];
    w["tau_star"] = num(c.cross_wlf.tau_star);
    w["n"] = num(c.cross_wlf.n);
    w["D1"] = num(c.cross_wlf.D1);
    w["T_ref"] = num(c.cross_wlf.T_ref);
    w["A1"] = num(c.cross_wlf.A1);
    w["A2"] = num(c.cross_wlf.A2);
    w["rho"] = num(c.cross_wlf.rho);
    w["cp"] = num(c.cross_wlf.cp);
    w["kappa"] = num(c.cross_wlf.kappa);

    auto& k = s["giesekus"];
    k["lambda"] = num(c.giesekus.lambda);
    k["alpha_G"] = num(c.giesekus.alpha_G);
    k["beta"] = num(c.giesekus.beta);
    k["eta_total"] = num(c.giesekus.eta_total);
    k["rho"] = num(c.giesekus.rho);

    auto& b = s["boundary"];
    b["T_wall"] = num(c.T_wall);
    b["T_in"] = num(c.T_in);

    auto& v = s["solver"];
    v["tol_nl"] = num(c.solver.tol_nl);
    v["max_iters"] = integer(c.solver.max_iters);
    v["relaxation"] = num(c.solver.relaxation);
    v["T_visc_floor"] = num(c.solver.T_visc_floor);
    v["viscous_heating"] = flag(c.solver.viscous_heating);
    v["c1"] = num(c.solver.c1);
    v["c2"] = num(c.solver.c2);
    v["c3"] = num(c.solver.c3);
    v["continuation_steps"] = integer(c.solver.continuation_steps);
    v["alpha_G_start"] = num(c.solver.alpha_G_start);
    v["max_newton_iters"] = integer(c.solver.max_newton_iters);
    v["max_stage_halvings"] = integer(c.solver.max_stage_halvings);

    auto& m = s["mesh"];
    m["h"] = num(c.mesh.h);
    m["grading"] = num(c.mesh.grading);
    m["growth"] = num(c.mesh.growth);
    m["heated_offset"] = num(c.mesh.heated_offset);
    m["min_angle_deg"] = num(c.mesh.min_angle_deg);

    auto& o = s["optimizer"];
    o["budget"] = count(c.optimizer.budget);
    o["alpha_lo"] = num(c.optimizer.alpha_lo);
    o["alpha_hi"] = num(c.optimizer.alpha_hi);
    o["tol_x"] = num(c.optimizer.tol_x);
    o["stagnation_window"] = count(c.optimizer.stagnation_window);
    o["margin"] = num(c.optimizer.margin);
    o["checkpoint_every"] = count(c.optimizer.checkpoint_every);

    auto& p = s["spline"];
    p["n_ctrl"] = count(c.n_ctrl);
    p["degree"] = integer(c.degree);
    return s;
}

}  // namespace

ExperimentConfig parse_config(std::istream& is) {
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ParseError(std::string("config syntax: ") + e.what());
    }
    ExperimentConfig cfg;
    // Lists replace defaults wholesale; start empty so an omitted key means none.
    cfg.feeding_rates.clear();
    auto s = schema(cfg);
    std::vector<std::string> problems;
    for (const auto& [section, keys] : tree) {
        const auto sec = s.find(section);
        if (sec == s.end()) {
            problems.push_back("unknown section [" + section + "]");
            continue;
        }
        for (const auto& [key, value] : keys) {
            const auto f = sec->second.find(key);
            if (f == sec->second.end()) {
                problems.push_back("unknown key " + section + "." + key);
                continue;
            }
            try {
                f->second.read(value.get_value<std::string>());
            } catch (const ParseError& e) {
                problems.push_back(section + "." + key + ": " + e.what());
            }
        }
    }
    if (!problems.empty()) {
        std::string msg = "config errors:";
        for (const auto& p : problems) msg += "\n  - " + p;
        throw ParseError(msg);
    }
    return cfg;
}

void write_config(std::ostream& os, const ExperimentConfig& cfg_in) {
    ExperimentConfig cfg = cfg_in;
    const auto s = schema(cfg);
    // Fixed section order so files diff cleanly.
    for (const char* section : {"experiment", "geometry", "boundary", "cross_wlf", "giesekus", "solver", "mesh",
                                "optimizer", "spline"}) {
        os << '[' << section << "]\n";
        for (const auto& [key, field] : s.at(section)) os << key << " = " << field.write() << '\n';
        os << '\n';
    }
}

ExperimentConfig validate_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config " + path);
    ExperimentConfig cfg = parse_config(in);
    if (const auto v = cfg.violations(); !v.empty()) throw ValidationError(v);
    return cfg;
}

std::vector<std::string> preset_names() {
    return {"viscous", "viscous-outlet", "viscoelastic", "viscoelastic-spline", "gallery"};
}

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig c;
    c.name = name;
    c.mesh.h = 0.2;
    c.mesh.grading = 0.25;
    if (name == "viscous") {
        c.model = ModelKind::ViscousGnf;
        c.feeding_rates = {0.67, 1.0, 1.4, 1.83, 2.33, 2.83};
        c.alpha0 = 30.0;
        c.optimizer.budget = 25;
    } else if (name == "viscous-outlet") {
        // Outlet-diameter sweep at the 1.83 mm/s operating point.
        c.model = ModelKind::ViscousGnf;
        c.feeding_rates = {1.83};
        c.outlet_diameters = {0.4, 0.5, 0.6, 0.7, 0.8};
        c.alpha0 = 30.0;
        c.optimizer.budget = 25;
    } else if (name == "viscoelastic") {
        c.model = ModelKind::Viscoelastic;
        c.feeding_rates = {5.0, 7.5, 10.0, 12.5};
        c.alpha0 = 50.0;
        c.optimizer.budget = 20;
    } else if (name == "viscoelastic-spline") {
        c.model = ModelKind::Viscoelastic;
        c.parametrization = Parametrization::Spline;
        c.feeding_rates = {10.0};
        c.alpha0 = 50.0;
        c.optimizer.budget = 40;
    } else if (name == "gallery") {
        c.model = ModelKind::Viscoelastic;
        c.feeding_rates = {10.0};
        c.gallery_angles = {30.0, 50.0, 70.0, 90.0};
        c.alpha0 = 50.0;
    } else {
        throw ValidationError({"unknown preset '" + name + "'"});
    }
    return c;
}

FlowCase flow_case(const ExperimentConfig& cfg, double feeding_rate, double d_out) {
    FlowCase fc;
    fc.model = cfg.model;
    fc.dims = cfg.dims;
    fc.dims.d_out = d_out;
    fc.cross_wlf = cfg.cross_wlf;
    fc.giesekus = cfg.giesekus;
    fc.bc.u_in = feeding_rate;
    fc.bc.T_wall = cfg.T_wall;
    fc.bc.T_in = cfg.T_in;
    fc.solver = cfg.solver;
    fc.mesh = cfg.mesh;
    return fc;
}

}  // namespace nozzle
