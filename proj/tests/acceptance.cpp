// Acceptance run: one line per criterion, exit status 1 if any fails.
// usage: acceptance [path to the tractorlab executable]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "oracles.hpp"
#include "tractorlab/boundary.hpp"
#include "tractorlab/expr.hpp"
#include "tractorlab/jet.hpp"
#include "tractorlab/verify.hpp"

using namespace tractorlab;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool ok = true;
    std::ostringstream msg;

    void need(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            msg << " [" << what << "]";
        }
    }
};

// largest residual per quantity, and whether every detail met its tolerance
struct Summary {
    std::map<std::string, double> worst;
    Status status = Status::Error;
    std::string reason;

    double operator[](const std::string& q) const {
        auto it = worst.find(q);
        return it == worst.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
    }
};

Summary summarize(const CheckReport& r) {
    Summary s;
    s.status = r.status;
    s.reason = r.reason;
    for (const auto& d : r.details) {
        double& w = s.worst[d.quantity];
        w = std::max(w, d.residual);
    }
    return s;
}

Summary run_one(const Geometry& g, const std::string& id, const SamplingPlan& plan) {
    auto rs = run_suite(g, {id}, plan);
    return summarize(rs.at(0));
}

std::string fmt(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.2e", v);
    return b;
}

// nan compares false, so a missing quantity fails
bool le(double v, double tol) { return v <= tol; }

SamplingPlan plan_with(int interior, int boundary) {
    SamplingPlan p;
    p.interior_points = interior;
    p.boundary_points = boundary;
    return p;
}

Outcome c1_jets() {
    Outcome o;
    std::mt19937_64 rng(20261016);
    std::uniform_real_distribution<double> pt(-0.8, 0.8);
    const int dim = 3;
    auto t0 = Clock::now();
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        Expr f = oracle::random_smooth(rng, dim, 3);
        std::vector<double> p(dim);
        for (auto& v : p) v = pt(rng);
        Jet j = eval_jet(f, p, 3);
        std::vector<long double> pl(p.begin(), p.end());
        for (int k = 0; k < j.layout().size; ++k) {
            auto mm = j.layout().multi(k);
            std::vector<int> m(mm.begin(), mm.end());
            double ref = static_cast<double>(oracle::central_difference(f, pl, m));
            worst = std::max(worst, std::abs(j.derivative(m) - ref) / std::max(1.0, std::abs(ref)));
        }
    }
    double secs = since(t0);
    o.need(worst <= 1e-6, "relative error");
    o.need(secs < 5.0, "runtime");
    o.msg << " worst " << fmt(worst) << ", " << fmt(secs) << " s";
    return o;
}

Outcome c2_curvature_identities() {
    Outcome o;
    auto t0 = Clock::now();
    double worst = 0.0;
    for (auto [name, dim] : std::vector<std::pair<std::string, int>>{{"klein", 3}, {"klein", 4}, {"af2_generic", 4}}) {
        Geometry g = builtin_geometry(name, dim);
        for (const char* id : {"weyl-traces", "bianchi"}) {
            Summary s = run_one(g, id, plan_with(50, 0));
            o.need(s.status == Status::Pass, name + std::to_string(dim) + " " + id);
            for (auto& [q, v] : s.worst) {
                o.need(le(v, 1e-9), name + std::to_string(dim) + " " + q);
                worst = std::max(worst, v);
            }
        }
        double re = run_one(g, "weyl-traces", plan_with(50, 0))["reassembly"];
        o.need(le(re, 1e-9), "reassembly");
    }
    double secs = since(t0);
    o.need(secs < 30.0, "runtime");
    o.msg << " worst " << fmt(worst) << ", " << fmt(secs) << " s";
    return o;
}

Outcome c3_asymptotic_constants() {
    Outcome o;
    Geometry k = builtin_geometry("klein", 3);
    auto pts = k.sample_boundary(5, 2);
    AsymptoticReport a = asymptotic_h(k, pts);
    o.need(a.error.empty(), "klein: " + a.error);
    o.need(a.S.size() == 5, "five boundary limits");
    double s_dev = 0.0;
    for (double s : a.S) s_dev = std::max(s_dev, std::abs(s + 6.0));
    o.need(s_dev <= 1e-5, "S = -6");
    // C = -n(n+1)/(4S) with n = 2
    double c_formula = -2.0 * 3.0 / (4.0 * a.S.at(0));
    o.need(std::abs(a.C - 0.25) <= 1e-6, "C = 1/4");
    o.need(std::abs(c_formula - a.C) <= 1e-6, "C from S");
    o.need(a.h_min_eig >= 0.5, "h eigenvalue");
    o.msg << " klein |S+6| " << fmt(s_dev) << ", C " << a.C << ", h min eig " << a.h_min_eig;

    for (double C : {0.25, 0.7, -0.3}) {
        Geometry g = builtin_geometry("af2_generic", 4, {{"C", std::to_string(C)}});
        AsymptoticReport r = asymptotic_h(g, g.sample_boundary(5, 2));
        o.need(r.error.empty() && std::abs(r.C - C) <= 1e-6, "af2 C=" + std::to_string(C));
        o.msg << "; af2 C " << C << " -> " << fmt(std::abs(r.C - C));
    }
    Summary s = run_one(k, "thm-2.5-C", plan_with(8, 5));
    o.need(s.status == Status::Pass, "thm-2.5-C");
    return o;
}

Outcome c4_transversal_mu() {
    Outcome o;
    Geometry k = builtin_geometry("klein", 3);
    Summary s = run_one(k, "prop-2.5-mu", plan_with(8, 5));
    o.need(s.status == Status::Pass, "status");
    o.need(le(s["constancy"], 1e-6), "constancy");
    o.need(le(s["value"], 1e-5), "value");
    o.need(le(s["cross-transversal"], 1e-4), "cross-transversal");
    o.msg << " constancy " << fmt(s["constancy"]) << ", value " << fmt(s["value"]) << ", cross "
          << fmt(s["cross-transversal"]);

    // the frozen value itself, along one transversal
    Point y = k.sample_boundary(1, 5).at(0);
    Point mu0(3, 0.0);
    for (int i = 0; i < 3; ++i) mu0[i] = -y[i];  // inward, drho(mu0) = 1 on the unit sphere
    for (auto& v : mu0) v *= 0.5;
    TransversalCurve c = geodetic_transversal(k, y, mu0);
    std::vector<double> ts, vs;
    for (size_t i = 1; i < c.samples.size() && ts.size() < 6; i += c.samples.size() / 8) {
        ts.push_back(c.samples[i].t);
        vs.push_back(rho2_g_mu_mu(k, c.samples[i]));
    }
    double v0 = neville(ts, vs, 0.0);
    o.need(std::abs(v0 - 0.25) <= 1e-5, "value 1/4");
    o.msg << ", rho^2 g(mu,mu) -> " << v0;
    return o;
}

Outcome c5_hessian_and_curvature_limits() {
    Outcome o;
    for (int dim : {3, 4}) {
        Geometry a1 = builtin_geometry("af1_generic", dim);
        for (const char* id : {"prop-3.2-i", "prop-3.3-i"}) {
            Summary s = run_one(a1, id, plan_with(8, 5));
            o.need(s.status == Status::Pass, "af1 " + std::to_string(dim) + " " + id);
            for (auto& [q, v] : s.worst) o.need(le(v, 1e-5), std::string(id) + " " + q);
        }
        Summary s = run_one(a1, "prop-3.2-i", plan_with(8, 5));
        o.msg << " af1 dim " << dim << " tangential hessian " << fmt(s["tangential-hessian-extrapolated"]) << ";";
    }
    Geometry k = builtin_geometry("klein", 3);
    Summary s = run_one(k, "prop-3.3-ii", plan_with(8, 5));
    o.need(s.status == Status::Pass, "klein prop-3.3-ii");
    o.need(le(s["curvature-limit"], 1e-5), "klein rho^2 R limit");
    o.msg << " klein rho^2 R " << fmt(s["curvature-limit"]);
    return o;
}

Outcome c6_phi_identity() {
    Outcome o;
    auto t0 = Clock::now();
    double worst = 0.0;
    for (auto [name, dim] : std::vector<std::pair<std::string, int>>{{"klein", 3}, {"af2_generic", 4}}) {
        Summary s = run_one(builtin_geometry(name, dim), "prop-4.3-identity", plan_with(100, 0));
        o.need(s.status == Status::Pass, name);
        for (auto& [q, v] : s.worst) {
            o.need(le(v, 1e-8), name + " " + q);
            worst = std::max(worst, v);
        }
    }
    double secs = since(t0);
    o.need(secs < 60.0, "runtime");
    o.msg << " worst " << fmt(worst) << ", " << fmt(secs) << " s";
    return o;
}

Outcome c7_splittings() {
    Outcome o;
    double worst = 0.0;
    for (auto [name, dim] :
         std::vector<std::pair<std::string, int>>{{"klein", 3}, {"klein", 4}, {"af2_generic", 4}, {"af1_generic", 3}}) {
        Geometry g = builtin_geometry(name, dim);
        Summary s = run_one(g, "splitting-equivariance", plan_with(8, 0));
        o.need(s.status == Status::Pass, name);
        for (auto& [q, v] : s.worst) {
            o.need(le(v, 1e-7), name + " " + q);
            worst = std::max(worst, v);
        }
        if (g.alpha == 2.0)
            for (const char* q : {"Lhat-form", "h-rho-splitting", "Phi-rho-splitting"})
                o.need(s.worst.count(q) == 1, name + " has " + q);
    }
    o.msg << " worst " << fmt(worst);
    return o;
}

Outcome c8_split_identities() {
    Outcome o;
    for (auto [name, dim] : std::vector<std::pair<std::string, int>>{{"klein", 3}, {"af2_generic", 4}}) {
        Summary s = run_one(builtin_geometry(name, dim), "prop-4.2-splitids", plan_with(8, 5));
        o.need(s.status == Status::Pass, name);
        double interior = 0.0;
        for (auto& [q, v] : s.worst)
            if (q != "t-drho-limit") interior = std::max(interior, v);
        o.need(le(interior, 1e-8), name + " interior");
        o.need(le(s["t-drho-limit"], 1e-5), name + " t.drho -> 1");
        o.msg << " " << name << " interior " << fmt(interior) << ", limit " << fmt(s["t-drho-limit"]) << ";";
    }
    return o;
}

Outcome c9_corrected_connection() {
    Outcome o;
    Geometry g = builtin_geometry("af2_generic", 4);
    Summary m = run_one(g, "thm-4.3-metric", plan_with(8, 5));
    Summary t = run_one(g, "thm-4.3-torsionfree", plan_with(8, 5));
    o.need(m.status == Status::Pass && t.status == Status::Pass, "status");
    o.need(le(m["metric-compatibility"], 1e-6), "metric compatibility");
    o.need(le(t["torsion"], 1e-6), "torsion");
    o.need(le(t["block-formula"], 1e-6), "curvature blocks");
    o.msg << " metric " << fmt(m["metric-compatibility"]) << ", torsion " << fmt(t["torsion"]) << ", blocks "
          << fmt(t["block-formula"]);
    return o;
}

Outcome c10_normality() {
    Outcome o;
    Geometry g = builtin_geometry("af2_generic", 4);
    auto rs = run_suite(g, {"thm-4.4-normality"}, plan_with(8, 5));
    Summary s = summarize(rs.at(0));
    o.need(s.status == Status::Pass, "status");
    o.need(le(s["zero-pattern"], 1e-5), "zero pattern");
    o.need(le(s["W-gamma-skew"], 1e-5), "W gamma-skew");
    o.need(le(s["ricci-contraction"], 1e-6), "ricci contraction");
    // the detector residual is 0 when the corrupted connection is rejected
    o.need(le(s["fault-detector"], 0.0), "fault detector");
    double fault = 0.0;
    for (const auto& d : rs[0].details)
        if (d.quantity == "fault-detector" && !d.note.empty()) {
            auto p = d.note.find_last_of(' ');
            fault = std::max(fault, std::atof(d.note.c_str() + p + 1));
        }
    o.need(fault > 0.1, "injected fault fires");
    o.msg << " zero " << fmt(s["zero-pattern"]) << ", skew " << fmt(s["W-gamma-skew"]) << ", ricci "
          << fmt(s["ricci-contraction"]) << ", fault " << fmt(fault);
    return o;
}

Outcome c11_klein_normal() {
    Outcome o;
    Summary s = run_one(builtin_geometry("klein", 4), "thm-4.1a-normal", plan_with(8, 5));
    o.need(s.status == Status::Pass, std::string("status ") + status_name(s.status) + " " + s.reason);
    o.need(le(s["hypothesis"], 1e-6), "hypothesis");
    o.need(le(s["sigma-line"], 1e-6) && le(s["ricci-contraction"], 1e-6), "normality");
    o.need(le(s["equivalence"], 1e-5), "equivalence");
    o.msg << " hypothesis " << fmt(s["hypothesis"]) << ", normality "
          << fmt(std::max(s["sigma-line"], s["ricci-contraction"])) << ", equivalence " << fmt(s["equivalence"]);
    return o;
}

Outcome c12_negative_control(const std::string& cli) {
    Outcome o;
    Geometry pc = builtin_geometry("poincare_control", 3);
    auto rs = run_suite(pc, {"all"}, plan_with(8, 5));
    for (const auto& r : rs) {
        o.need(r.status != Status::Error, r.id + " errored");
        if (r.id == "prop-2.1-extend" || r.id == "prop-2.2-dense") {
            o.need(r.status == Status::Fail, r.id + " fails");
            o.need(std::isinf(r.max_residual), r.id + " divergence");
        }
    }
    o.need(any_failed(rs), "suite fails");
    if (cli.empty()) {
        o.need(false, "no executable given");
    } else {
        std::string cmd = "'" + cli + "' verify --geometry poincare_control --dim 3 --out /dev/null 2>/dev/null";
        int rc = std::system(cmd.c_str());
        int code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
        o.need(code == 1, "exit status " + std::to_string(code));
        o.msg << " cli exit " << code;
    }
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    std::string cli = argc > 1 ? argv[1] : "";
    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"jets vs finite differences", c1_jets},
        {"weyl-traces, bianchi", c2_curvature_identities},
        {"thm-2.5 scalar curvature, C, h", c3_asymptotic_constants},
        {"prop-2.5-mu", c4_transversal_mu},
        {"prop-3.2-i, prop-3.3-i/ii", c5_hessian_and_curvature_limits},
        {"prop-4.3-identity", c6_phi_identity},
        {"splitting-equivariance", c7_splittings},
        {"prop-4.2-splitids", c8_split_identities},
        {"thm-4.3", c9_corrected_connection},
        {"thm-4.4-normality", c10_normality},
        {"thm-4.1a-normal on klein", c11_klein_normal},
        {"negative control", [&] { return c12_negative_control(cli); }},
    };
    auto t0 = Clock::now();
    int failed = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.ok = false;
            o.msg << " exception: " << e.what();
        }
        failed += !o.ok;
        std::cout << (o.ok ? "PASS " : "FAIL ") << (i + 1) << ". " << criteria[i].first << ":" << o.msg.str()
                  << std::endl;
    }
    double secs = since(t0);
    bool total_ok = secs < 300.0;
    std::cout << "total " << fmt(secs) << " s" << (total_ok ? "" : " (over 5 min)") << ", " << failed
              << " of " << criteria.size() << " criteria failed" << std::endl;
    return failed || !total_ok ? 1 : 0;
}
