// tractorlab command line: `verify` runs the check suite, `eval` prints one quantity.
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tractorlab/boundary.hpp"
#include "tractorlab/errors.hpp"
#include "tractorlab/verify.hpp"

using namespace tractorlab;
using json = nlohmann::ordered_json;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GeometryArgs {
    std::string source;
    int dim = 3;
    std::vector<std::string> params;
};

Geometry make_geometry(const GeometryArgs& a) {
    Geometry g;
    try {
        bool is_file = std::filesystem::exists(a.source) || a.source.ends_with(".json");
        if (is_file) {
            if (!a.params.empty()) throw ConfigError("--param only applies to builtin geometries");
            g = load_geometry_file(a.source);
        } else {
            Params p;
            for (const auto& kv : a.params) {
                auto eq = kv.find('=');
                if (eq == std::string::npos || eq == 0) throw ConfigError("--param expects key=value, got '" + kv + "'");
                p[kv.substr(0, eq)] = kv.substr(eq + 1);
            }
            g = builtin_geometry(a.source, a.dim, p);
        }
        validate_geometry(g);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return g;
}

Point parse_point(const std::string& s, int dim) {
    Point p;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            size_t used = 0;
            p.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError("bad coordinate '" + tok + "' in point '" + s + "'");
        }
    }
    if (static_cast<int>(p.size()) != dim)
        throw ConfigError("point '" + s + "' has " + std::to_string(p.size()) + " coordinates, geometry has " +
                          std::to_string(dim));
    return p;
}

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json values_json(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

struct Evaluated {
    std::vector<int> shape;
    std::vector<double> values;
    std::string splitting;
    std::optional<double> error;
    json extra = json::object();
};

Evaluated from_array(const JetArray& a) {
    Evaluated e{a.shape(), a.values(), {}, {}, json::object()};
    if (a.size() > 0 && a.order() > 0) {
        // Taylor coefficients per component, multi-indices in jet layout order
        const JetLayout& L = a[0].layout();
        json mi = json::array();
        for (int k = 0; k < L.size; ++k) {
            auto m = L.multi(k);
            mi.push_back(std::vector<int>(m.begin(), m.end()));
        }
        json cs = json::array();
        for (size_t k = 0; k < a.size(); ++k) {
            auto c = a[k].coeffs();
            cs.push_back(values_json(std::vector<double>(c.begin(), c.end())));
        }
        e.extra["multi_indices"] = std::move(mi);
        e.extra["coefficients"] = std::move(cs);
    }
    return e;
}

Evaluated from_tensor(const Tensor& t) { return {t.shape, t.v, {}, {}, json::object()}; }

// Interior formulas; also used on the ray ladder towards a boundary point.
Evaluated pointwise(const Geometry& geom, const std::string& q, const Point& x, int order) {
    int d = geom.dim;
    Connection conn = interior_connection(geom);
    if (q == "scalar_curvature") {
        CurvaturePack pk = curvature_pack(conn, x, order);
        Jet S = scalar_curvature(mat_inverse(geom.metric(x, order)), pk.ricci);
        JetArray out = JetArray::zeros({1}, d, order);
        out[0] = S;
        return from_array(out);
    }
    if (q == "schouten") return from_array(curvature_pack(conn, x, order).schouten);
    if (q == "weyl") return from_array(curvature_pack(conn, x, order).weyl);
    if (q == "cotton") return from_array(curvature_pack(conn, x, order).cotton);
    if (q == "l_tau") {
        JetArray G = conn.gamma(x, 2);
        JetArray P = schouten(ricci(riemann(G)));
        Evaluated e = from_array(l_tau_matrix(tau_from_metric(geom.metric(x, 2)), G, P));
        e.splitting = "levi-civita";
        return e;
    }
    throw ConfigError("quantity '" + q + "' has no pointwise form");
}

const std::vector<std::string> kQuantities{"scalar_curvature", "schouten", "weyl",  "cotton", "h_asymptotic",
                                           "l_tau",            "gamma",    "phi",   "t_vector"};

Evaluated evaluate(const Geometry& geom, const std::string& q, const Point& x, bool on_boundary, bool extrapolate,
                   int order, const LimitPlan& plan) {
    int d = geom.dim;
    auto ladder = [&](const std::function<Evaluated(const Point&)>& f) {
        std::vector<int> shape;
        std::string split;
        LimitResult r = boundary_limit(
            [&](double eps) {
                Evaluated e = f(geom.ray_point(x, eps));
                shape = e.shape;
                split = e.splitting;
                return e.values;
            },
            plan);
        if (r.diverged) throw PoleError("boundary limit of " + q + " diverges (" + r.note + ")");
        Evaluated e{shape, r.value, split, r.error, json::object()};
        if (r.vanishing) e.extra["vanishing"] = true;
        return e;
    };

    if (q == "scalar_curvature" || q == "schouten" || q == "weyl" || q == "cotton") {
        if (on_boundary && extrapolate) return ladder([&](const Point& p) { return pointwise(geom, q, p, 0); });
        return pointwise(geom, q, x, order);
    }
    if (q == "l_tau") {
        if (!(on_boundary && extrapolate)) return pointwise(geom, q, x, 0);
        // L(tau) blows up in the Levi-Civita splitting; the rho splitting is smooth
        Connection rc = rho_connection(geom);
        return ladder([&](const Point& p) {
            JetArray G = rc.gamma(p, 2);
            Evaluated e =
                from_array(l_tau_matrix(tau_from_metric(geom.metric(p, 2)), G, schouten(ricci(riemann(G)))));
            e.splitting = "rho";
            return e;
        });
    }
    if (q == "gamma") {
        // rho P + drho drho / (4 rho); tangential block at a boundary point
        if (on_boundary) {
            auto basis = geom.tangential_basis(x);
            if (!extrapolate) {
                Evaluated e = from_tensor(boundary_tractor_bundle(geom, x).gamma_ij);
                e.splitting = "tangential";
                return e;
            }
            Evaluated e = ladder([&](const Point& p) {
                Tensor full({d, d});
                RhoScaleData D = rho_scale_data(geom, p, 0);
                for (int a = 0; a < d; ++a)
                    for (int b = 0; b < d; ++b) full(a, b) = D.gamma(a, b).value();
                return from_tensor(tangential(full, basis));
            });
            e.splitting = "tangential";
            return e;
        }
        RhoScaleData D = rho_scale_data(geom, x, 0);
        return from_array(D.gamma);
    }
    if (q == "t_vector") {
        if (on_boundary && extrapolate)
            return ladder([&](const Point& p) { return from_array(rho_scale_data(geom, p, 0).t); });
        return from_array(rho_scale_data(geom, x, 0).t);
    }
    if (q == "phi") {
        if (!on_boundary) throw ConfigError("phi lives on the boundary; use --boundary-point");
        return from_tensor(normalize_boundary_connection(geom, x).phi);
    }
    if (q == "h_asymptotic") {
        Point y = on_boundary ? x : geom.project_to_boundary(x);
        AsymptoticReport r = asymptotic_h(geom, {y}, plan);
        if (!r.error.empty()) throw Error(r.error);
        if (on_boundary) {
            Evaluated e = from_tensor(r.h_boundary);
            e.splitting = "tangential";
            e.error = r.h_error;
            e.extra["C"] = r.C;
            e.extra["min_abs_eigenvalue"] = r.h_min_eig;
            return e;
        }
        // h = rho g - C drho drho / rho
        JetArray g = geom.metric(x, 0);
        double rho = geom.rho_value(x);
        Point dr = geom.rho_gradient(x);
        Tensor h({d, d});
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) h(a, b) = rho * g(a, b).value() - r.C * dr[a] * dr[b] / rho;
        Evaluated e = from_tensor(h);
        e.extra["C"] = r.C;
        return e;
    }
    throw ConfigError("unknown quantity '" + q + "'");
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path);
    f << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tractorlab: numerical checks of projective compactness and boundary tractor calculus"};
    app.require_subcommand(1);

    GeometryArgs ga;
    SamplingPlan plan;
    int boundary_points = -1;
    std::string checks = "all", out, format = "json";
    std::string quantity, point, bpoint;
    bool extrapolate = false, no_timing = false;
    int jet_order = 0;
    std::uint64_t seed = plan.seed;

    auto common = [&](CLI::App* c) {
        c->add_option("--geometry", ga.source, "builtin name or geometry JSON file")->required();
        c->add_option("--dim", ga.dim, "dimension for builtin geometries")->capture_default_str();
        c->add_option("--param", ga.params, "builtin parameter key=value (repeatable)")->take_all();
        c->add_option("--eps0", plan.limit.eps0, "largest rho on the extrapolation ladder")->capture_default_str();
        c->add_option("--levels", plan.limit.levels, "ladder levels")->capture_default_str();
        c->add_option("--out", out, "output file (default stdout)");
    };

    CLI::App* verify = app.add_subcommand("verify", "run registry checks on a geometry");
    common(verify);
    verify->add_option("--checks", checks, "comma-separated ids or prefixes, or 'all'")->capture_default_str();
    verify->add_option("--seed", seed, "sampling seed (TRACTORLAB_SEED overrides)")->capture_default_str();
    verify->add_option("--points", plan.interior_points, "interior sample points")->capture_default_str();
    verify->add_option("--boundary-points", boundary_points, "boundary sample points (default 5)");
    verify->add_option("--ode-step", plan.ode_step, "transversal integrator step")->capture_default_str();
    verify->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    verify->add_flag("--no-timing", no_timing, "omit wall times (byte-stable reports)");

    CLI::App* eval = app.add_subcommand("eval", "evaluate one quantity at a point");
    common(eval);
    eval->add_option("--quantity", quantity, "one of scalar_curvature, schouten, weyl, cotton, h_asymptotic, l_tau, "
                                             "gamma, phi, t_vector")
        ->required();
    auto* po = eval->add_option("--point", point, "interior point x0,x1,...");
    auto* bo = eval->add_option("--boundary-point", bpoint, "boundary point x0,x1,...");
    po->excludes(bo);
    eval->add_flag("--extrapolate", extrapolate, "take the boundary limit along the inward ray");
    eval->add_option("--jet-order", jet_order, "also print Taylor coefficients up to this order (curvature quantities)")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (const char* env = std::getenv("TRACTORLAB_SEED")) {
            try {
                seed = std::stoull(env);
            } catch (const std::exception&) {
                throw ConfigError(std::string("TRACTORLAB_SEED is not an integer: ") + env);
            }
        }
        plan.seed = seed;
        if (boundary_points >= 0) plan.boundary_points = boundary_points;
        if (plan.limit.levels < 2 || plan.limit.eps0 <= 0) throw ConfigError("need --levels >= 2 and --eps0 > 0");
        Geometry geom = make_geometry(ga);

        if (verify->parsed()) {
            std::vector<std::string> ids;
            std::stringstream ss(checks);
            std::string tok;
            while (std::getline(ss, tok, ','))
                if (!tok.empty()) ids.push_back(tok);
            try {
                select_checks(ids);
            } catch (const ValidationError& e) {
                throw ConfigError(e.what());
            }
            auto reports = run_suite(geom, ids, plan);
            write_output(out, format == "csv" ? reports_to_csv(reports, !no_timing) : reports_to_json(reports, !no_timing));
            for (const auto& r : reports) {
                std::cerr << r.id << ": " << status_name(r.status);
                if (r.status == Status::Pass || r.status == Status::Fail)
                    std::cerr << " (max " << r.max_residual << ", tol " << r.tolerance << ")";
                if (!r.reason.empty()) std::cerr << " - " << r.reason;
                std::cerr << "\n";
            }
            return any_failed(reports) ? 1 : 0;
        }

        if (std::find(kQuantities.begin(), kQuantities.end(), quantity) == kQuantities.end())
            throw ConfigError("unknown quantity '" + quantity + "'");
        if (point.empty() && bpoint.empty()) throw ConfigError("eval needs --point or --boundary-point");
        if (extrapolate && bpoint.empty()) throw ConfigError("--extrapolate needs --boundary-point");
        bool on_boundary = !bpoint.empty();
        Point x = parse_point(on_boundary ? bpoint : point, geom.dim);
        if (on_boundary && std::abs(geom.rho_value(x)) > 1e-10)
            throw ConfigError("boundary point has rho = " + std::to_string(geom.rho_value(x)));
        if (!geom.in_box(x)) throw ConfigError("point outside the geometry's coordinate box");

        json doc;
        doc["geometry"] = geom.name;
        doc["dim"] = geom.dim;
        doc["quantity"] = quantity;
        doc[on_boundary ? "boundary_point" : "point"] = values_json(x);
        try {
            Evaluated e = evaluate(geom, quantity, x, on_boundary, extrapolate, jet_order, plan.limit);
            doc["shape"] = e.shape;
            doc["values"] = values_json(e.values);
            if (!e.splitting.empty()) doc["splitting"] = e.splitting;
            if (e.error) doc["extrapolation_error"] = number(*e.error);
            for (auto& [k, v] : e.extra.items()) doc[k] = v;
        } catch (const PoleError& e) {
            doc["error"] = std::string("pole: ") + e.what();
            if (on_boundary && !extrapolate) doc["hint"] = "use --extrapolate for boundary values";
            write_output(out, doc.dump(2) + "\n");
            std::cerr << "error: pole: " << e.what() << "\n";
            return 1;
        }
        write_output(out, doc.dump(2) + "\n");
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
