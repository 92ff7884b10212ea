// Command-line front end: adaptive runs and the Table 1 oracle.
//
//   avem run --k 2 --theta 0.5 --gamma 10 --eps 1e-3 square.mesh poisson.prob
//   avem oracle --table1
//
// Exit codes: 0 success, 1 configuration or input error, 2 solver failure,
// 3 iteration cap reached before the stopping rule.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "avem/adaptivity.hpp"
#include "avem/mesh_io.hpp"
#include "avem/oracles.hpp"

namespace fs = std::filesystem;
using namespace avem;

namespace {

struct RunOptions {
    int k = 2;
    double gamma = 10.0;
    double gamma0 = 1.0;
    double theta = 0.5;
    double eps = 1e-3;
    int lambda_cap = 1;
    int m = 0;
    int max_iters = 30;
    int threads = 1;
    int initial_refinements = 0;
    unsigned long seed = 0;
    double beta = 1.0;
    double zeta = 1.0;
    bool no_reference = false;
    bool dump_matrix = false;
    std::string out = ".";
    std::string mesh;
    std::string problem;
};

void validate(const RunOptions& o) {
    if (o.k < 2 || o.k > 4) throw CLI::ValidationError("--k", "k must be 2, 3 or 4");
    if (!(o.theta > 0.0 && o.theta < 1.0)) throw CLI::ValidationError("--theta", "theta must lie in (0, 1)");
    if (!(o.gamma >= o.gamma0)) throw CLI::ValidationError("--gamma", "gamma must be >= gamma0");
    if (!(o.eps > 0.0)) throw CLI::ValidationError("--eps", "eps must be positive");
    if (o.lambda_cap < 1) throw CLI::ValidationError("--lambda-cap", "lambda cap must be >= 1");
    if (o.m < 0) throw CLI::ValidationError("--m", "m must be >= 1 (or 0 for the default)");
    if (o.max_iters < 1) throw CLI::ValidationError("--max-iters", "at least one iteration");
    if (o.initial_refinements < 0) throw CLI::ValidationError("--initial-refinements", "must be >= 0");
    if (o.threads < 1) throw CLI::ValidationError("--threads", "at least one thread");
}

std::string num(double v) {
    if (std::isnan(v)) return "";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

int run(const RunOptions& o) {
    Mesh mesh = read_mesh_file(o.mesh, o.k, o.lambda_cap);
    const PiecewiseData data = read_problem_file(o.problem, mesh);
    for (int i = 0; i < o.initial_refinements; ++i) mesh.refine_uniform();
    mesh.enforce_admissibility();
    fs::create_directories(o.out);

    GalerkinConfig cfg;
    cfg.gamma = o.gamma;
    cfg.theta = o.theta;
    cfg.eps = o.eps;
    cfg.m = o.m;
    cfg.max_iters = o.max_iters;
    cfg.beta = o.beta;
    cfg.zeta = o.zeta;
    cfg.reference = !o.no_reference;

    auto observer = [&](const IterationView& it) {
        std::ofstream ind(fs::path(o.out) / ("indicators_" + std::to_string(it.iter) + ".csv"));
        write_indicators(ind, it.indicators);
        std::vector<double> eta, psi, stab;
        for (const auto& e : it.indicators.items) {
            eta.push_back(e.eta_sq);
            psi.push_back(e.psi_sq());
            stab.push_back(e.stab);
        }
        std::ofstream vtk(fs::path(o.out) / ("mesh_" + std::to_string(it.iter) + ".vtk"));
        write_vtk(vtk, it.mesh, {{"eta_sq", eta}, {"psi_sq", psi}, {"stab", stab}});
        if (o.dump_matrix) {
            std::ofstream mat(fs::path(o.out) / ("matrix_" + std::to_string(it.iter) + ".txt"));
            write_matrix(mat, assemble(it.disc, o.gamma).matrix);
        }
        std::cerr << "iter " << it.iter << ": dofs " << it.disc.map.size << ", elements " << it.disc.active.size()
                  << ", eta^2 " << it.indicators.eta_sq << ", psi^2 " << it.indicators.psi_sq() << '\n';
    };
    GalerkinResult res = galerkin(std::move(mesh), data, cfg, observer);

    std::ofstream conv(fs::path(o.out) / "convergence.csv");
    conv << "iter,dofs,elements,eta_sq,psi_sq,stab,err_sq_surrogate,Q,alpha_hat\n";
    for (const auto& r : res.log) {
        conv << r.iter << ',' << r.dofs << ',' << r.elements << ',' << num(r.eta_sq) << ',' << num(r.psi_sq) << ','
             << num(r.stab) << ',' << num(r.err_sq) << ',' << num(r.Q) << ',' << num(r.alpha_hat) << '\n';
    }
    std::ofstream con(fs::path(o.out) / "contraction.csv");
    con << "step,alpha_hat,err_share,eta_share,psi_share,flagged\n";
    if (cfg.reference) {
        const ContractionSummary s = contraction_monitor(res.log, o.beta, o.zeta);
        for (std::size_t j = 0; j < s.alpha_hat.size(); ++j) {
            const bool flag = std::find(s.flagged.begin(), s.flagged.end(), static_cast<int>(j + 1)) != s.flagged.end();
            con << j + 1 << ',' << num(s.alpha_hat[j]) << ',' << num(s.shares[j][0]) << ',' << num(s.shares[j][1])
                << ',' << num(s.shares[j][2]) << ',' << (flag ? 1 : 0) << '\n';
        }
        if (!s.alpha_hat.empty()) {
            con << "# max " << num(s.max) << " mean " << num(s.mean) << " geometric_mean " << num(s.geometric_mean)
                << '\n';
        }
    }
    std::ofstream tree(fs::path(o.out) / "mesh_final.tree");
    write_tree(tree, res.mesh);
    if (!res.converged) {
        std::cerr << "iteration cap " << o.max_iters << " reached before eta^2 + psi^2 <= eps^2\n";
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive virtual element solver on triangular meshes with hanging nodes"};
    app.require_subcommand(1);

    RunOptions o;
    CLI::App* run_cmd = app.add_subcommand("run", "Run the adaptive loop");
    run_cmd->set_config("--config", "", "key=value configuration file; flags override it");
    run_cmd->add_option("--k", o.k, "Polynomial degree (2..4)");
    run_cmd->add_option("--gamma", o.gamma, "Stabilization parameter");
    run_cmd->add_option("--gamma0", o.gamma0, "Lower bound enforced on gamma");
    run_cmd->add_option("--theta", o.theta, "Marking parameter in (0,1)");
    run_cmd->add_option("--eps", o.eps, "Tolerance for eta^2 + psi^2 <= eps^2");
    run_cmd->add_option("--lambda-cap", o.lambda_cap, "Admissibility bound on the global index");
    run_cmd->add_option("--m", o.m, "Uniform levels for psi-dominated elements (0 = default)");
    run_cmd->add_option("--max-iters", o.max_iters, "Iteration cap");
    run_cmd->add_option("--initial-refinements", o.initial_refinements, "Uniform bisection sweeps applied to the input mesh");
    run_cmd->add_option("--threads", o.threads, "Worker threads (the loop currently runs on one)");
    run_cmd->add_option("--seed", o.seed, "Seed for randomized checks");
    run_cmd->add_option("--beta", o.beta, "Weight of eta^2 in the contraction quantity");
    run_cmd->add_option("--zeta", o.zeta, "Weight of psi^2 in the contraction quantity");
    run_cmd->add_flag("--no-reference", o.no_reference, "Skip the conforming reference solution");
    run_cmd->add_flag("--dump-matrix", o.dump_matrix, "Write the system matrix of every iteration");
    run_cmd->add_option("--out", o.out, "Output directory");
    run_cmd->add_option("mesh", o.mesh, "Initial mesh file")->required();
    run_cmd->add_option("problem", o.problem, "Problem data file")->required();

    bool table1 = false;
    std::string oracle_out;
    CLI::App* oracle_cmd = app.add_subcommand("oracle", "Analysis oracles");
    oracle_cmd->add_flag("--table1", table1, "Refinement factors mu^2(k, m) as CSV");
    oracle_cmd->add_option("--out", oracle_out, "Write table1.csv into this directory instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*run_cmd) {
            validate(o);
            return run(o);
        }
        if (*oracle_cmd) {
            if (!table1) {
                std::cerr << "oracle: nothing requested (try --table1)\n";
                return 1;
            }
            if (oracle_out.empty()) {
                write_table1(std::cout);
            } else {
                fs::create_directories(oracle_out);
                std::ofstream f(fs::path(oracle_out) / "table1.csv");
                write_table1(f);
            }
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 1;
    } catch (const SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return 2;
    } catch (const MeshError& e) {
        std::cerr << "mesh error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
