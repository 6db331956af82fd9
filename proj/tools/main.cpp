// Command-line front end: benchmark generation, reduction, simulation and
// metric evaluation. Exit codes: 0 ok, 2 usage error, 3 method not
// applicable, 4 numerical failure.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lpvred/io.hpp"
#include "lpvred/sdr.hpp"
#include "lpvred/sim.hpp"
#include "lpvred/sor.hpp"
#include "lpvred/systems.hpp"

namespace fs = std::filesystem;
using namespace lpvred;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string signal_header(const std::string& prefix, int n) {
    std::string h;
    for (int i = 1; i <= n; ++i) {
        if (i > 1) h += ",";
        h += prefix + std::to_string(i);
    }
    return h;
}

MatrixXd grid_to_matrix(const std::vector<VectorXd>& pts) {
    MatrixXd M(pts.front().size(), static_cast<Eigen::Index>(pts.size()));
    for (size_t k = 0; k < pts.size(); ++k) M.col(static_cast<Eigen::Index>(k)) = pts[k];
    return M;
}

std::vector<VectorXd> matrix_to_grid(const MatrixXd& M) {
    std::vector<VectorXd> pts;
    for (int k = 0; k < M.cols(); ++k) pts.push_back(M.col(k));
    return pts;
}

// ---------------------------------------------------------------- bench ----

int cmd_bench(const std::string& name, std::uint64_t seed, const fs::path& out_dir) {
    const BenchmarkBundle bundle = build_benchmark(name);
    fs::create_directories(out_dir);
    write_json_file(out_dir / (name + ".json"), model_to_json(bundle.lpv));

    json meta;
    meta["name"] = bundle.name;
    meta["seed"] = seed;
    meta["n_x"] = bundle.lpv.n_x();
    meta["n_u"] = bundle.lpv.n_u();
    meta["n_y"] = bundle.lpv.n_y();
    meta["n_p"] = bundle.lpv.n_p();
    meta["amp_train"] = bundle.amp_train;
    meta["amp_val"] = bundle.amp_val;
    write_json_file(out_dir / (name + "_meta.json"), meta);

    const SignalSet sig = design_inputs(bundle, seed);
    const std::string uh = signal_header("u", bundle.lpv.n_u());
    write_matrix_csv(out_dir / "u_train.csv", uh, sig.u_train);
    write_matrix_csv(out_dir / "u_in.csv", uh, sig.u_in);
    write_matrix_csv(out_dir / "u_out.csv", uh, sig.u_out);

    const GridSet grids = design_grids(bundle, seed);
    const std::string ph = signal_header("p", bundle.lpv.n_p());
    write_matrix_csv(out_dir / "grid_train.csv", ph, grid_to_matrix(grids.train));
    write_matrix_csv(out_dir / "grid_in.csv", ph, grid_to_matrix(grids.in));
    write_matrix_csv(out_dir / "grid_out.csv", ph, grid_to_matrix(grids.out));
    std::cout << "bench " << name << ": n_x=" << bundle.lpv.n_x() << " n_p=" << bundle.lpv.n_p()
              << " -> " << out_dir.string() << "\n";
    return 0;
}

// --------------------------------------------------------------- reduce ----

int cmd_reduce_sor(const std::string& method, const fs::path& model_path, int order, int mm_length,
                   const std::string& grid_path, const fs::path& out_path) {
    const AffineLpvSs model = model_from_json(read_json_file(model_path));
    std::vector<VectorXd> grid;
    if (!grid_path.empty()) grid = matrix_to_grid(read_matrix_csv(grid_path));

    const auto t0 = std::chrono::steady_clock::now();
    SorResult result;
    if (method == "ltibr")
        result = ltibr(model, order);
    else if (method == "lpvbr") {
        if (grid.empty()) throw UsageError("lpvbr requires --grid");
        result = lpvbr(model, order, grid);
    } else if (method == "mm")
        result = moment_match(model, mm_length, order);
    else if (method == "pvop") {
        if (grid.empty()) throw UsageError("pvop requires --grid");
        result = pvop(model, order, grid);
    } else if (method == "lfrbr")
        result = lfrbr(model, order);
    else
        throw UsageError("unknown sor method: " + method);
    const double cpu = elapsed_since(t0);

    write_json_file(out_path, sor_result_to_json(result, cpu));
    std::cout << "sor " << method << ": r_x=" << result.reduced.n_x() << " cpu=" << cpu << "s -> "
              << out_path.string() << "\n";
    return 0;
}

int cmd_reduce_sdr(const std::string& method, const fs::path& model_path, int dim,
                   const std::string& traj_path, double degree, int hidden, int epochs,
                   std::uint64_t seed, const fs::path& out_path) {
    const AffineLpvSs model = model_from_json(read_json_file(model_path));

    SchedulingData data;
    if (method != "sdrbr") {
        if (traj_path.empty()) throw UsageError("method " + method + " requires --traj");
        data = collect_scheduling(read_trajectory_csv(traj_path), model);
    }

    const auto t0 = std::chrono::steady_clock::now();
    SdrResult result;
    if (method == "pca")
        result = pca_reduce(data, model, dim);
    else if (method == "tpca")
        result = tpca_reduce(data, model, dim);
    else if (method == "kpca") {
        KpcaOptions opts;
        opts.degree = degree;
        result = kpca_reduce(data, model, dim, opts);
    } else if (method == "sdrbr")
        result = sdrbr_reduce(model, dim);
    else if (method == "ae" || method == "dnn") {
        NnOptions opts;
        opts.hidden = hidden;
        if (epochs > 0) opts.train.max_epochs = epochs;
        opts.train.seed = seed;
        result = method == "ae" ? ae_reduce(data, model, dim, opts) : dnn_reduce(data, model, dim, opts);
    } else
        throw UsageError("unknown sdr method: " + method);
    const double cpu = elapsed_since(t0);

    write_json_file(out_path, sdr_result_to_json(result, cpu));
    std::cout << "sdr " << method << ": n_phi=" << result.reduced.n_p() << " cpu=" << cpu << "s -> "
              << out_path.string() << "\n";
    return 0;
}

// ------------------------------------------------------------- simulate ----

SchedulingMap reduced_scheduling(const BenchmarkBundle& bundle, const ReductionRecord& rec) {
    SchedulingMap sched;
    if (rec.kind == "sor") {
        const MatrixXd V = rec.sor->V;
        const SchedulingMap eta = bundle.eta;
        sched.n_p = bundle.lpv.n_p();
        sched.eta = [V, eta](const VectorXd& x, const VectorXd& u) { return eta(V * x, u); };
    } else {
        const SchedulingCoder mu = rec.sdr->mu;
        const SchedulingMap eta = bundle.eta;
        sched.n_p = rec.sdr->reduced.n_p();
        sched.eta = [mu, eta](const VectorXd& x, const VectorXd& u) { return mu(eta(x, u)); };
    }
    return sched;
}

int cmd_simulate(const std::string& benchmark, const std::string& result_path, bool nonlinear,
                 const fs::path& input_path, double t_s, const fs::path& out_path) {
    const BenchmarkBundle bundle = build_benchmark(benchmark);
    const MatrixXd u = read_matrix_csv(input_path);

    Trajectory traj;
    if (nonlinear) {
        traj = simulate_nonlinear(bundle.nl, u, VectorXd::Zero(bundle.nl.n_x), t_s, &bundle.eta);
    } else if (!result_path.empty()) {
        const ReductionRecord rec = reduction_from_json(read_json_file(result_path));
        const AffineLpvSs& reduced = rec.kind == "sor" ? rec.sor->reduced : rec.sdr->reduced;
        traj = simulate_lpv(reduced, reduced_scheduling(bundle, rec), u,
                            VectorXd::Zero(reduced.n_x()), t_s);
    } else {
        traj = simulate_lpv(bundle.lpv, bundle.eta, u, VectorXd::Zero(bundle.lpv.n_x()), t_s);
    }
    write_trajectory_csv(out_path, traj);
    std::cout << "simulate: " << traj.length() << " samples"
              << (traj.diverged ? " (diverged)" : "") << " -> " << out_path.string() << "\n";
    return 0;
}

// ----------------------------------------------------------------- eval ----

int cmd_eval(const std::string& benchmark, const fs::path& result_path, const fs::path& input_path,
             const std::string& grid_path, const std::string& out_prefix, double t_s, bool skip_h2,
             bool skip_hinf, bool skip_nrmse) {
    const BenchmarkBundle bundle = build_benchmark(benchmark);
    const ReductionRecord rec = reduction_from_json(read_json_file(result_path));
    const AffineLpvSs& reduced = rec.kind == "sor" ? rec.sor->reduced : rec.sdr->reduced;
    const std::string method = rec.kind == "sor" ? rec.sor->method : rec.sdr->method;

    double err_nrmse = std::numeric_limits<double>::quiet_NaN();
    if (!skip_nrmse) {
        const MatrixXd u = read_matrix_csv(input_path);
        const Trajectory ref =
            simulate_lpv(bundle.lpv, bundle.eta, u, VectorXd::Zero(bundle.lpv.n_x()), t_s);
        const Trajectory test = simulate_lpv(reduced, reduced_scheduling(bundle, rec), u,
                                             VectorXd::Zero(reduced.n_x()), t_s);
        err_nrmse = nrmse(ref, test);
    }

    MetricReport report;
    bool have_local = false;
    if (!grid_path.empty()) {
        const std::vector<VectorXd> grid = matrix_to_grid(read_matrix_csv(grid_path));
        std::function<VectorXd(const VectorXd&)> phi_map;
        if (rec.kind == "sdr") {
            const SchedulingCoder mu = rec.sdr->mu;
            phi_map = [mu](const VectorXd& p) { return mu(p); };
        }
        LocalErrorOptions opts;
        opts.compute_h2 = !skip_h2;
        opts.compute_hinf = !skip_hinf;
        report = local_errors(bundle.lpv, reduced, grid, phi_map, opts);
        have_local = true;
    }

    // Per-point CSV.
    if (have_local) {
        std::ofstream pf(out_prefix + "_points.csv");
        if (!pf) throw std::runtime_error("cannot open points csv");
        pf << signal_header("p", bundle.lpv.n_p()) << ",lambda2,lambdainf,stable\n";
        for (const auto& pt : report.points) {
            for (int i = 0; i < pt.p.size(); ++i) pf << fmt_double(pt.p(i)) << ",";
            pf << fmt_double(pt.lambda2) << "," << fmt_double(pt.lambdainf) << ","
               << (pt.stable ? 1 : 0) << "\n";
        }
    }

    // Summary CSV; deliberately excludes CPU time so that metric outputs are
    // byte-identical across runs (`table` merges CPU from the result JSON).
    std::ofstream sf(out_prefix + "_summary.csv");
    if (!sf) throw std::runtime_error("cannot open summary csv");
    sf << "method,nrmse,mean_lambda2,max_lambda2,std_lambda2,mean_lambdainf,max_lambdainf,"
          "std_lambdainf,unstable_ratio,n_stable,n_unstable\n";
    sf << method << "," << fmt_double(err_nrmse) << "," << fmt_double(report.mean2) << ","
       << fmt_double(report.max2) << "," << fmt_double(report.std2) << ","
       << fmt_double(report.meaninf) << "," << fmt_double(report.maxinf) << ","
       << fmt_double(report.stdinf) << "," << fmt_double(report.unstable_ratio) << ","
       << report.n_stable << "," << report.n_unstable << "\n";
    sf.close();
    std::cout << "eval " << method << ": nrmse=" << fmt_double(err_nrmse)
              << " max_l2=" << fmt_double(report.max2) << " -> " << out_prefix << "_summary.csv\n";
    return 0;
}

// ---------------------------------------------------------------- table ----

int cmd_table(const std::vector<std::string>& cells, const fs::path& out_path) {
    std::ofstream f(out_path);
    if (!f) throw std::runtime_error("cannot open table output");
    f << "method,cpu_seconds,nrmse,mean_lambda2,max_lambda2,std_lambda2,mean_lambdainf,"
         "max_lambdainf,std_lambdainf,unstable_ratio,n_stable,n_unstable\n";
    for (const std::string& cell : cells) {
        const auto sep = cell.find('=');
        if (sep == std::string::npos)
            throw UsageError("table cell must be result.json=summary.csv, got: " + cell);
        const ReductionRecord rec = reduction_from_json(read_json_file(cell.substr(0, sep)));
        std::ifstream sf(cell.substr(sep + 1));
        if (!sf) throw UsageError("cannot open summary: " + cell.substr(sep + 1));
        std::string header, row;
        std::getline(sf, header);
        std::getline(sf, row);
        const auto comma = row.find(',');
        if (comma == std::string::npos) throw UsageError("malformed summary row in " + cell);
        f << row.substr(0, comma) << "," << fmt_double(rec.cpu_seconds) << row.substr(comma) << "\n";
    }
    std::cout << "table: " << cells.size() << " rows -> " << out_path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LPV model reduction toolkit"};
    app.require_subcommand(1);
    app.set_config("--config");
    std::uint64_t seed = 1;
    app.add_option("--seed", seed, "Global random seed")->capture_default_str();

    // bench
    auto* bench = app.add_subcommand("bench", "Generate a benchmark bundle");
    std::string bench_name, bench_out = ".";
    bench->add_option("name", bench_name, "Benchmark name (msd1|msd2|msd3|rm)")->required();
    bench->add_option("--out", bench_out, "Output directory")->capture_default_str();

    // reduce
    auto* reduce = app.add_subcommand("reduce", "Run a reduction method");
    reduce->require_subcommand(1);
    std::string red_method, red_model, red_grid, red_traj, red_out = "result.json";
    int red_order = 1, red_dim = 1, red_len = 3, red_hidden = 0, red_epochs = 0;
    double red_degree = 8.0;

    auto* rsor = reduce->add_subcommand("sor", "State-order reduction");
    rsor->add_option("--method", red_method, "ltibr|lpvbr|mm|pvop|lfrbr")->required();
    rsor->add_option("--order", red_order, "Reduced state order")->required();
    rsor->add_option("--length", red_len, "Moment-matching word length")->capture_default_str();
    rsor->add_option("--grid", red_grid, "Scheduling grid CSV (lpvbr, pvop)");
    rsor->add_option("--model", red_model, "Model JSON")->required();
    rsor->add_option("--out", red_out, "Result JSON path")->capture_default_str();

    auto* rsdr = reduce->add_subcommand("sdr", "Scheduling-dimension reduction");
    rsdr->add_option("--method", red_method, "pca|tpca|kpca|sdrbr|ae|dnn")->required();
    rsdr->add_option("--dim", red_dim, "Reduced scheduling dimension")->required();
    rsdr->add_option("--traj", red_traj, "Training trajectory CSV");
    rsdr->add_option("--degree", red_degree, "Kernel degree (kpca)")->capture_default_str();
    rsdr->add_option("--hidden", red_hidden, "Hidden width (ae, dnn); 0 = auto");
    rsdr->add_option("--epochs", red_epochs, "Max training epochs (ae, dnn); 0 = default");
    rsdr->add_option("--model", red_model, "Model JSON")->required();
    rsdr->add_option("--out", red_out, "Result JSON path")->capture_default_str();

    // simulate
    auto* sim = app.add_subcommand("simulate", "Self-scheduled time simulation");
    std::string sim_bench, sim_result, sim_input, sim_out = "traj.csv";
    bool sim_nl = false;
    double sim_ts = 0.01;
    sim->add_option("--benchmark", sim_bench, "Benchmark name")->required();
    sim->add_option("--result", sim_result, "Reduction result JSON (reduced simulation)");
    sim->add_flag("--nonlinear", sim_nl, "Simulate the nonlinear plant instead");
    sim->add_option("--input", sim_input, "Input signal CSV")->required();
    sim->add_option("--t-s", sim_ts, "Sample period")->capture_default_str();
    sim->add_option("--out", sim_out, "Trajectory CSV path")->capture_default_str();

    // eval
    auto* eval = app.add_subcommand("eval", "Compute metric report for a reduction");
    std::string ev_bench, ev_result, ev_input, ev_grid, ev_prefix = "metrics";
    bool ev_skip_h2 = false, ev_skip_hinf = false, ev_skip_nrmse = false;
    double ev_ts = 0.01;
    eval->add_option("--benchmark", ev_bench, "Benchmark name")->required();
    eval->add_option("--result", ev_result, "Reduction result JSON")->required();
    eval->add_option("--input", ev_input, "Validation input CSV (NRMSE)");
    eval->add_option("--grid", ev_grid, "Evaluation grid CSV (local errors)");
    eval->add_option("--t-s", ev_ts, "Sample period")->capture_default_str();
    eval->add_flag("--skip-h2", ev_skip_h2, "Skip lambda2 computation");
    eval->add_flag("--skip-hinf", ev_skip_hinf, "Skip lambdainf computation");
    eval->add_flag("--skip-nrmse", ev_skip_nrmse, "Skip time-domain NRMSE");
    eval->add_option("--out-prefix", ev_prefix, "Output file prefix")->capture_default_str();

    // table
    auto* table = app.add_subcommand("table", "Aggregate results into one table");
    std::vector<std::string> tb_cells;
    std::string tb_out = "table.csv";
    table->add_option("cells", tb_cells, "result.json=summary.csv pairs")->required();
    table->add_option("--out", tb_out, "Table CSV path")->capture_default_str();

    for (auto* sub : app.get_subcommands({})) {
        sub->fallthrough();
        for (auto* nested : sub->get_subcommands({})) nested->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*bench) return cmd_bench(bench_name, seed, bench_out);
        if (*rsor) return cmd_reduce_sor(red_method, red_model, red_order, red_len, red_grid, red_out);
        if (*rsdr)
            return cmd_reduce_sdr(red_method, red_model, red_dim, red_traj, red_degree, red_hidden,
                                  red_epochs, seed, red_out);
        if (*sim) return cmd_simulate(sim_bench, sim_result, sim_nl, sim_input, sim_ts, sim_out);
        if (*eval)
            return cmd_eval(ev_bench, ev_result, ev_input, ev_grid, ev_prefix, ev_ts, ev_skip_h2,
                            ev_skip_hinf, ev_skip_nrmse);
        if (*table) return cmd_table(tb_cells, tb_out);
    } catch (const NotApplicableError& e) {
        std::cerr << "not-applicable: " << e.what() << "\n";
        return 3;
    } catch (const UsageError& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 2;
}
