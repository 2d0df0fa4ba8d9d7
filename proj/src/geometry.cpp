#include "tractorlab/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "tractorlab/errors.hpp"

namespace tractorlab {

using json = nlohmann::json;

namespace {

std::string fmt_point(const Point& p) {
    std::ostringstream os;
    os.precision(6);
    os << '(';
    for (size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
    os << ')';
    return os.str();
}

double param_number(const Params& params, const std::string& key, double fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    try {
        size_t used = 0;
        double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ValidationError("parameter " + key + " must be a number, got '" + it->second + "'");
    }
}

std::string sum_of_squares(const std::vector<std::string>& names) {
    std::string s = "(";
    for (size_t i = 0; i < names.size(); ++i) s += (i ? " + " : "") + names[i] + "^2";
    return s + ")";
}

std::vector<std::vector<Expr>> parse_matrix(const std::vector<std::vector<std::string>>& src,
                                             const std::vector<std::string>& coords) {
    std::vector<std::vector<Expr>> m(src.size());
    for (size_t a = 0; a < src.size(); ++a)
        for (const auto& s : src[a]) m[a].push_back(parse_expr(s, coords));
    return m;
}

Geometry ball_geometry(const std::string& name, int dim) {
    Geometry g;
    g.name = name;
    g.dim = dim;
    for (int i = 0; i < dim; ++i) g.coords.push_back("x" + std::to_string(i));
    std::string r2 = sum_of_squares(g.coords);
    g.rho = parse_expr("1 - " + r2, g.coords);
    g.alpha = 2.0;
    g.signature = "riemannian";
    g.box.assign(dim, {-1.0, 1.0});
    return g;
}

}  // namespace

std::vector<std::string> builtin_names() { return {"flat", "klein", "af2_generic", "af1_generic", "poincare_control"}; }

Geometry builtin_geometry(const std::string& name, int dim, const Params& params) {
    bool known = false;
    for (const auto& n : builtin_names()) known = known || n == name;
    if (!known) throw ValidationError("unknown geometry '" + name + "'");
    if (dim < 3) throw ValidationError("dimension must be at least 3, got " + std::to_string(dim));

    Geometry g;
    if (name == "flat") {
        g.name = name;
        g.dim = dim;
        for (int i = 0; i < dim; ++i) g.coords.push_back("x" + std::to_string(i));
        std::vector<std::vector<std::string>> m(dim, std::vector<std::string>(dim, "0"));
        for (int a = 0; a < dim; ++a) m[a][a] = "1";
        g.metric_exprs = parse_matrix(m, g.coords);
        g.rho = parse_expr("1 - x0", g.coords);
        g.alpha = 2.0;
        g.signature = "riemannian";
        g.box.assign(dim, {-0.5, 0.5});
        g.box[0] = {-0.5, 1.0};
    } else if (name == "klein" || name == "poincare_control") {
        g = ball_geometry(name, dim);
        std::string r2 = sum_of_squares(g.coords);
        std::vector<std::vector<std::string>> m(dim, std::vector<std::string>(dim));
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b) {
                if (name == "klein") {
                    std::string off = g.coords[a] + "*" + g.coords[b] + "/(1 - " + r2 + ")^2";
                    m[a][b] = (a == b ? "1/(1 - " + r2 + ") + " : std::string()) + off;
                } else {
                    m[a][b] = a == b ? "4/(1 - " + r2 + ")^2" : "0";
                }
            }
        g.metric_exprs = parse_matrix(m, g.coords);
        if (name == "klein") {
            // delta/rho + (x.dx)^2/rho^2 with drho = -2 x.dx
            AsymptoticForm af;
            af.C = Expr::num(0.25);
            std::vector<std::vector<std::string>> h(dim, std::vector<std::string>(dim, "0"));
            for (int a = 0; a < dim; ++a) h[a][a] = "1";
            af.h = parse_matrix(h, g.coords);
            g.equivalent_form = af;
        }
    } else {
        // af2_generic / af1_generic: coordinates (r, y1..yn) with rho = r
        g.name = name;
        g.dim = dim;
        g.coords.push_back("r");
        for (int i = 1; i < dim; ++i) g.coords.push_back("y" + std::to_string(i));
        g.rho = parse_expr("r", g.coords);
        g.alpha = name == "af2_generic" ? 2.0 : 1.0;
        double C = param_number(params, "C", 0.25);
        if (C == 0.0) throw ValidationError("asymptotic-form constant C must be nonzero");
        std::string hkind = params.count("h") ? params.at("h") : "default";
        if (hkind != "default" && hkind != "delta")
            throw ValidationError("parameter h must be 'default' or 'delta', got '" + hkind + "'");
        std::vector<std::vector<std::string>> h(dim, std::vector<std::string>(dim, "0"));
        for (int a = 0; a < dim; ++a) {
            h[a][a] = "1";
            if (a > 0 && hkind == "default") h[a][a] = "1 + r*" + g.coords[a] + "*" + g.coords[a];
        }
        AsymptoticForm af;
        af.C = Expr::num(C);
        af.h = parse_matrix(h, g.coords);
        g.asymptotic = af;
        g.signature = C > 0 ? "riemannian" : "lorentzian";
        g.box.assign(dim, {-0.6, 0.6});
        g.box[0] = {0.0, 0.6};
        // for C < 0 the metric degenerates where r + C h^00 = r + C vanishes
        if (C < 0) g.box[0].second = std::min(0.6, -0.75 * C);
    }
    g.params = params;
    validate_geometry(g);
    return g;
}

JetArray form_metric(const Geometry& geom, const AsymptoticForm& form, const Point& p, int order) {
    int dim = geom.dim;
    auto vars = coordinate_jets(p, order + 1);
    Jet r = eval_jet(geom.rho, vars);
    std::vector<Jet> dr(dim);
    for (int a = 0; a < dim; ++a) dr[a] = r.partial(a);
    Jet r0 = r.truncated(order);
    auto power = [&](double e) {
        double k = std::round(e);
        return std::abs(k - e) < 1e-12 ? ipow(r0, static_cast<int>(k)) : pow(r0, e);
    };
    Jet inv1 = power(-2.0 / geom.alpha).truncated(order);
    Jet inv2 = power(-4.0 / geom.alpha).truncated(order);
    Jet C = eval_jet(form.C, vars).truncated(order);
    JetArray g = JetArray::zeros({dim, dim}, dim, order);
    for (int a = 0; a < dim; ++a)
        for (int b = a; b < dim; ++b) {
            Jet h = eval_jet(form.h[a][b], vars).truncated(order);
            g(a, b) = h * inv1 + C * dr[a] * dr[b] * inv2;
            if (b != a) g(b, a) = g(a, b);
        }
    return g;
}

JetArray Geometry::metric(const Point& p, int order) const {
    if (static_cast<int>(p.size()) != dim) throw IndexError("point has wrong dimension");
    if (!metric_exprs.empty()) {
        auto vars = coordinate_jets(p, order);
        JetArray g = JetArray::zeros({dim, dim}, dim, order);
        for (int a = 0; a < dim; ++a)
            for (int b = a; b < dim; ++b) {
                g(a, b) = eval_jet(metric_exprs[a][b], vars);
                if (b != a) g(b, a) = g(a, b);
            }
        return g;
    }
    if (asymptotic) return form_metric(*this, *asymptotic, p, order);
    throw Error("geometry '" + name + "' carries no metric");
}

JetArray Geometry::christoffel_data(const Point& p, int order) const {
    if (christoffel_exprs.empty()) throw Error("geometry '" + name + "' carries no explicit connection");
    auto vars = coordinate_jets(p, order);
    JetArray G = JetArray::zeros({dim, dim, dim}, dim, order);
    for (size_t k = 0; k < G.size(); ++k) G[k] = eval_jet(christoffel_exprs[k], vars);
    return G;
}

TensorField Geometry::metric_field() const {
    TensorField f;
    f.name = "g";
    f.indices = {IndexKind::Down, IndexKind::Down};
    f.symmetric = true;
    Geometry self = *this;
    f.eval = [self](const Point& p, int order) { return self.metric(p, order); };
    return f;
}

Jet Geometry::rho_jet(const Point& p, int order) const { return eval_jet(rho, p, order); }

double Geometry::rho_value(const Point& p) const { return eval_scalar(rho, p); }

Point Geometry::rho_gradient(const Point& p) const {
    Jet r = rho_jet(p, 1);
    Point g(dim);
    for (int a = 0; a < dim; ++a) g[a] = r.coeffs()[1 + a];
    return g;
}

bool Geometry::in_box(const Point& p) const {
    for (int i = 0; i < dim; ++i)
        if (p[i] < box[i].first - 1e-12 || p[i] > box[i].second + 1e-12) return false;
    return true;
}

std::vector<Point> Geometry::sample_interior(int count, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::vector<Point> out;
    int attempts = 0;
    while (static_cast<int>(out.size()) < count) {
        if (++attempts > 1000 * (count + 10)) throw ValidationError("could not sample interior points of " + name);
        Point p(dim);
        for (int i = 0; i < dim; ++i) p[i] = std::uniform_real_distribution<double>(box[i].first, box[i].second)(rng);
        if (rho_value(p) >= interior_rho_min) out.push_back(p);
    }
    return out;
}

Point Geometry::project_to_boundary(Point p) const {
    for (int it = 0; it < 100; ++it) {
        double r = rho_value(p);
        if (std::abs(r) <= 1e-15) break;
        Point g = rho_gradient(p);
        double n2 = 0.0;
        for (double v : g) n2 += v * v;
        if (n2 < 1e-16) throw ValidationError("drho vanishes near " + fmt_point(p));
        for (int i = 0; i < dim; ++i) p[i] -= r * g[i] / n2;
    }
    if (std::abs(rho_value(p)) > 1e-12) throw ValidationError("boundary projection did not converge near " + fmt_point(p));
    return p;
}

std::vector<Point> Geometry::sample_boundary(int count, std::uint64_t seed) const {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<Point> out;
    int attempts = 0;
    while (static_cast<int>(out.size()) < count) {
        if (++attempts > 1000 * (count + 10)) throw ValidationError("could not sample boundary points of " + name);
        Point p(dim);
        for (int i = 0; i < dim; ++i) p[i] = std::uniform_real_distribution<double>(box[i].first, box[i].second)(rng);
        if (rho_value(p) <= 0.0) continue;
        Point y;
        try {
            y = project_to_boundary(p);
        } catch (const ValidationError&) {
            continue;
        }
        if (!in_box(y)) continue;
        // keep the straight inward ray inside the box for the extrapolation ladder
        if (!in_box(ray_point(y, 0.1))) continue;
        out.push_back(y);
    }
    return out;
}

Point Geometry::transversal(const Point& y) const {
    Point g = rho_gradient(y);
    double n2 = 0.0;
    for (double v : g) n2 += v * v;
    if (std::sqrt(n2) < 1e-8) throw ValidationError("drho degenerate at " + fmt_point(y));
    for (double& v : g) v /= n2;
    return g;
}

Point Geometry::ray_point(const Point& y, double eps) const {
    Point mu = transversal(y);
    double s = eps;
    Point x(dim);
    for (int it = 0; it < 60; ++it) {
        for (int i = 0; i < dim; ++i) x[i] = y[i] + s * mu[i];
        Jet r = rho_jet(x, 1);
        double f = r.value() - eps;
        double df = 0.0;
        for (int i = 0; i < dim; ++i) df += r.coeffs()[1 + i] * mu[i];
        if (df == 0.0) throw ValidationError("ray tangent to a level set of rho at " + fmt_point(x));
        double ds = f / df;
        s -= ds;
        if (std::abs(ds) <= 1e-16 * (1.0 + std::abs(s))) break;
    }
    for (int i = 0; i < dim; ++i) x[i] = y[i] + s * mu[i];
    return x;
}

std::vector<Point> Geometry::tangential_basis(const Point& p) const {
    Point nrm = rho_gradient(p);
    double len = 0.0;
    for (double v : nrm) len += v * v;
    len = std::sqrt(len);
    if (len < 1e-8) throw ValidationError("drho degenerate at " + fmt_point(p));
    for (double& v : nrm) v /= len;
    std::vector<Point> basis{nrm};
    std::vector<std::pair<double, Point>> cand;
    for (int i = 0; i < dim; ++i) {
        Point e(dim, 0.0);
        e[i] = 1.0;
        for (const auto& b : basis) {
            double d = 0.0;
            for (int k = 0; k < dim; ++k) d += e[k] * b[k];
            for (int k = 0; k < dim; ++k) e[k] -= d * b[k];
        }
        double l = 0.0;
        for (double v : e) l += v * v;
        l = std::sqrt(l);
        if (l < 1e-8) continue;
        for (double& v : e) v /= l;
        basis.push_back(e);
        if (static_cast<int>(basis.size()) == dim) break;
    }
    basis.erase(basis.begin());
    if (static_cast<int>(basis.size()) != dim - 1) throw ValidationError("tangential basis construction failed");
    return basis;
}

// ---------------------------------------------------------------------------
// Validation

void validate_geometry(const Geometry& g) {
    if (g.dim < 2) throw ValidationError("dimension must be at least 2");
    if (static_cast<int>(g.coords.size()) != g.dim) throw ValidationError("coordinate count does not match dim");
    if (!(g.alpha > 0.0 && g.alpha <= 2.0)) throw ValidationError("alpha must lie in (0, 2]");
    if (static_cast<int>(g.box.size()) != g.dim) throw ValidationError("sampling box does not match dim");
    if (!g.rho.valid()) throw ValidationError("geometry has no rho");
    int sources = (!g.metric_exprs.empty()) + g.asymptotic.has_value() + (!g.christoffel_exprs.empty());
    if (sources != 1) throw ValidationError("exactly one of metric, asymptotic form or christoffel must be given");
    if (!g.metric_exprs.empty()) {
        if (static_cast<int>(g.metric_exprs.size()) != g.dim) throw ValidationError("metric has wrong row count");
        for (const auto& row : g.metric_exprs)
            if (static_cast<int>(row.size()) != g.dim) throw ValidationError("metric has wrong column count");
    }
    if (g.asymptotic) {
        double k = 2.0 / g.alpha;
        if (std::abs(k - std::round(k)) > 1e-12) throw ValidationError("asymptotic form needs 2/alpha integral");
        if (static_cast<int>(g.asymptotic->h.size()) != g.dim) throw ValidationError("h has wrong row count");
        for (const auto& row : g.asymptotic->h)
            if (static_cast<int>(row.size()) != g.dim) throw ValidationError("h has wrong column count");
    }
    if (!g.christoffel_exprs.empty() && static_cast<int>(g.christoffel_exprs.size()) != g.dim * g.dim * g.dim)
        throw ValidationError("christoffel array has wrong size");

    auto pts = g.sample_interior(5, 7);
    for (const auto& p : pts) {
        if (g.has_metric()) {
            std::vector<std::vector<double>> m(g.dim, std::vector<double>(g.dim));
            for (int a = 0; a < g.dim; ++a)
                for (int b = 0; b < g.dim; ++b) {
                    const Expr* e = nullptr;
                    if (!g.metric_exprs.empty()) e = &g.metric_exprs[a][b];
                    else e = &g.asymptotic->h[a][b];
                    m[a][b] = eval_scalar(*e, p);
                }
            double scale = 0.0;
            for (auto& row : m)
                for (double v : row) scale = std::max(scale, std::abs(v));
            for (int a = 0; a < g.dim; ++a)
                for (int b = 0; b < a; ++b)
                    if (std::abs(m[a][b] - m[b][a]) > 1e-12 * std::max(1.0, scale))
                        throw ValidationError("metric is not symmetric at " + fmt_point(p) + " (components " +
                                              std::to_string(a) + "," + std::to_string(b) + ")");
            JetArray gj = g.metric(p, 0);
            Eigen::MatrixXd M(g.dim, g.dim);
            for (int a = 0; a < g.dim; ++a)
                for (int b = 0; b < g.dim; ++b) M(a, b) = gj(a, b).value();
            double det = M.determinant();
            if (!std::isfinite(det) || std::abs(det) < 1e-12 * std::pow(M.cwiseAbs().maxCoeff(), g.dim))
                throw ValidationError("metric is singular at " + fmt_point(p));
            if (g.equivalent_form) {
                JetArray f = form_metric(g, *g.equivalent_form, p, 0);
                for (size_t k = 0; k < f.size(); ++k)
                    if (std::abs(f[k].value() - gj[k].value()) > 1e-9 * (1.0 + std::abs(gj[k].value())))
                        throw ValidationError("equivalent asymptotic form disagrees with the metric at " + fmt_point(p));
            }
        } else {
            JetArray G = g.christoffel_data(p, 0);
            for (int c = 0; c < g.dim; ++c)
                for (int a = 0; a < g.dim; ++a)
                    for (int b = 0; b < a; ++b)
                        if (std::abs(G(c, a, b).value() - G(c, b, a).value()) > 1e-12)
                            throw ValidationError("connection has torsion at " + fmt_point(p));
        }
    }
    for (const auto& y : g.sample_boundary(3, 11)) {
        Point d = g.rho_gradient(y);
        double n = 0.0;
        for (double v : d) n += v * v;
        if (std::sqrt(n) < 1e-8) throw ValidationError("drho vanishes at boundary point " + fmt_point(y));
        if (g.asymptotic) {
            if (eval_scalar(g.asymptotic->C, y) == 0.0)
                throw ValidationError("C vanishes at boundary point " + fmt_point(y));
            auto T = g.tangential_basis(y);
            int m = static_cast<int>(T.size());
            Eigen::MatrixXd H(m, m);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    double s = 0.0;
                    for (int a = 0; a < g.dim; ++a)
                        for (int b = 0; b < g.dim; ++b) s += T[i][a] * T[j][b] * eval_scalar(g.asymptotic->h[a][b], y);
                    H(i, j) = s;
                }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()));
            if (es.eigenvalues().cwiseAbs().minCoeff() < 1e-8)
                throw ValidationError("h is degenerate on the boundary at " + fmt_point(y));
        }
    }
}

// ---------------------------------------------------------------------------
// Documents

namespace {

std::string expr_string(const json& v, const std::string& where) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) {
        std::ostringstream os;
        os.precision(17);
        os << v.get<double>();
        return os.str();
    }
    throw SchemaError(where + " must be an expression string or number");
}

Expr parse_field(const json& v, const std::string& where, const std::vector<std::string>& coords) {
    std::string src = expr_string(v, where);
    try {
        return parse_expr(src, coords);
    } catch (const ParseError& e) {
        throw SchemaError(where + ": " + e.what());
    }
}

std::vector<std::vector<Expr>> parse_doc_matrix(const json& v, const std::string& where, int dim,
                                                const std::vector<std::string>& coords) {
    if (!v.is_array() || static_cast<int>(v.size()) != dim)
        throw SchemaError(where + " must be a " + std::to_string(dim) + "x" + std::to_string(dim) + " array");
    std::vector<std::vector<Expr>> m(dim);
    for (int a = 0; a < dim; ++a) {
        if (!v[a].is_array() || static_cast<int>(v[a].size()) != dim)
            throw SchemaError(where + " row " + std::to_string(a) + " must have " + std::to_string(dim) + " entries");
        for (int b = 0; b < dim; ++b)
            m[a].push_back(parse_field(v[a][b], where + "[" + std::to_string(a) + "][" + std::to_string(b) + "]", coords));
    }
    return m;
}

const json& require(const json& doc, const char* key) {
    if (!doc.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
    return doc.at(key);
}

}  // namespace

Geometry load_geometry(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("malformed document: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("geometry document must be an object");

    Geometry g;
    g.name = doc.value("name", std::string("custom"));
    const json& dim = require(doc, "dim");
    if (!dim.is_number_integer()) throw SchemaError("dim must be an integer");
    g.dim = dim.get<int>();
    if (g.dim < 2) throw SchemaError("dim must be at least 2");
    const json& coords = require(doc, "coords");
    if (!coords.is_array() || static_cast<int>(coords.size()) != g.dim) throw SchemaError("coords must list dim names");
    for (const auto& c : coords) {
        if (!c.is_string()) throw SchemaError("coordinate names must be strings");
        g.coords.push_back(c.get<std::string>());
    }
    g.rho = parse_field(require(doc, "rho"), "rho", g.coords);
    const json& alpha = require(doc, "alpha");
    if (!alpha.is_number()) throw SchemaError("alpha must be a number");
    g.alpha = alpha.get<double>();
    g.signature = doc.value("signature", std::string("unknown"));

    std::string kind = doc.value("kind", std::string("metric"));
    if (kind == "asymptotic_form") {
        AsymptoticForm af;
        af.C = parse_field(require(doc, "C"), "C", g.coords);
        af.h = parse_doc_matrix(require(doc, "h"), "h", g.dim, g.coords);
        g.asymptotic = af;
    } else if (kind == "metric") {
        if (doc.contains("metric")) {
            g.metric_exprs = parse_doc_matrix(doc.at("metric"), "metric", g.dim, g.coords);
        } else if (doc.contains("christoffel")) {
            const json& G = doc.at("christoffel");
            if (!G.is_array() || static_cast<int>(G.size()) != g.dim) throw SchemaError("christoffel must be dim x dim x dim");
            for (int c = 0; c < g.dim; ++c) {
                auto m = parse_doc_matrix(G[c], "christoffel[" + std::to_string(c) + "]", g.dim, g.coords);
                for (auto& row : m)
                    for (auto& e : row) g.christoffel_exprs.push_back(e);
            }
        } else {
            throw SchemaError("missing field 'metric'");
        }
    } else {
        throw SchemaError("unknown kind '" + kind + "'");
    }

    if (doc.contains("box")) {
        const json& b = doc.at("box");
        if (!b.is_array() || static_cast<int>(b.size()) != g.dim) throw SchemaError("box must give one interval per coordinate");
        for (const auto& iv : b) {
            if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number())
                throw SchemaError("box entries must be [lo, hi]");
            g.box.emplace_back(iv[0].get<double>(), iv[1].get<double>());
        }
    } else {
        g.box.assign(g.dim, {-1.0, 1.0});
    }
    if (doc.contains("interior_rho_min")) g.interior_rho_min = doc.at("interior_rho_min").get<double>();
    validate_geometry(g);
    return g;
}

Geometry load_geometry_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot read geometry file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_geometry(ss.str());
}

std::string geometry_to_json(const Geometry& g) {
    json doc;
    doc["name"] = g.name;
    doc["dim"] = g.dim;
    doc["coords"] = g.coords;
    doc["rho"] = print_expr(g.rho);
    doc["alpha"] = g.alpha;
    doc["signature"] = g.signature;
    auto matrix = [](const std::vector<std::vector<Expr>>& m) {
        json a = json::array();
        for (const auto& row : m) {
            json r = json::array();
            for (const auto& e : row) r.push_back(print_expr(e));
            a.push_back(r);
        }
        return a;
    };
    if (g.asymptotic) {
        doc["kind"] = "asymptotic_form";
        doc["C"] = print_expr(g.asymptotic->C);
        doc["h"] = matrix(g.asymptotic->h);
    } else if (!g.metric_exprs.empty()) {
        doc["metric"] = matrix(g.metric_exprs);
    } else {
        json G = json::array();
        for (int c = 0; c < g.dim; ++c) {
            json m = json::array();
            for (int a = 0; a < g.dim; ++a) {
                json r = json::array();
                for (int b = 0; b < g.dim; ++b) r.push_back(print_expr(g.christoffel_exprs[(c * g.dim + a) * g.dim + b]));
                m.push_back(r);
            }
            G.push_back(m);
        }
        doc["christoffel"] = G;
    }
    json box = json::array();
    for (auto [lo, hi] : g.box) box.push_back({lo, hi});
    doc["box"] = box;
    doc["interior_rho_min"] = g.interior_rho_min;
    return doc.dump(2);
}

}  // namespace tractorlab
