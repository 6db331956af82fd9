#include "lpvred/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lpvred {

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{}) throw std::invalid_argument("bad number: " + s);
    return v;
}

namespace {

json mat_flat(const MatrixXd& M) {
    json arr = json::array();
    for (int i = 0; i < M.rows(); ++i)
        for (int j = 0; j < M.cols(); ++j) arr.push_back(M(i, j));
    return arr;
}

MatrixXd mat_unflat(const json& arr, int rows, int cols) {
    if (static_cast<int>(arr.size()) != rows * cols)
        throw std::invalid_argument("matrix payload size mismatch");
    MatrixXd M(rows, cols);
    int k = 0;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) M(i, j) = arr[static_cast<size_t>(k++)].get<double>();
    return M;
}

json mat_to_json(const MatrixXd& M) {
    return json{{"rows", M.rows()}, {"cols", M.cols()}, {"data", mat_flat(M)}};
}

MatrixXd mat_from_json(const json& j) {
    return mat_unflat(j.at("data"), j.at("rows").get<int>(), j.at("cols").get<int>());
}

json vec_to_json(const VectorXd& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

VectorXd vec_from_json(const json& arr) {
    VectorXd v(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    return v;
}

json mlp_to_json(const Mlp& net) {
    json j;
    j["widths"] = net.widths();
    json acts = json::array();
    for (auto a : net.acts()) acts.push_back(a == Mlp::Act::tanh ? "tanh" : "identity");
    j["acts"] = acts;
    json ws = json::array(), bs = json::array();
    for (const auto& W : net.weights()) ws.push_back(mat_to_json(W));
    for (const auto& b : net.biases()) bs.push_back(vec_to_json(b));
    j["weights"] = ws;
    j["biases"] = bs;
    return j;
}

Mlp mlp_from_json(const json& j) {
    std::vector<int> widths = j.at("widths").get<std::vector<int>>();
    std::vector<Mlp::Act> acts;
    for (const auto& a : j.at("acts"))
        acts.push_back(a.get<std::string>() == "tanh" ? Mlp::Act::tanh : Mlp::Act::identity);
    Mlp net(widths, acts, 0);
    const auto& ws = j.at("weights");
    const auto& bs = j.at("biases");
    for (size_t l = 0; l < ws.size(); ++l) {
        net.weights()[l] = mat_from_json(ws[l]);
        net.biases()[l] = vec_from_json(bs[l]);
    }
    return net;
}

}  // namespace

json model_to_json(const AffineLpvSs& model) {
    json j;
    j["n_x"] = model.n_x();
    j["n_u"] = model.n_u();
    j["n_y"] = model.n_y();
    j["n_p"] = model.n_p();
    json basis = json::array();
    for (const auto& L : model.basis()) basis.push_back(mat_flat(L));
    j["basis"] = basis;
    json bounds = json::array();
    for (const auto& [lo, hi] : model.bounds()) bounds.push_back(json::array({lo, hi}));
    j["bounds"] = bounds;
    return j;
}

AffineLpvSs model_from_json(const json& j) {
    const int n_x = j.at("n_x").get<int>();
    const int n_u = j.at("n_u").get<int>();
    const int n_y = j.at("n_y").get<int>();
    const int n_p = j.at("n_p").get<int>();
    std::vector<MatrixXd> basis;
    for (const auto& b : j.at("basis")) basis.push_back(mat_unflat(b, n_x + n_y, n_x + n_u));
    if (static_cast<int>(basis.size()) != n_p + 1)
        throw std::invalid_argument("model JSON: basis count mismatch");
    std::vector<std::pair<double, double>> bounds;
    for (const auto& b : j.at("bounds"))
        bounds.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
    return AffineLpvSs(n_x, n_u, n_y, std::move(basis), std::move(bounds));
}

json coder_to_json(const SchedulingCoder& c) {
    json j;
    switch (c.kind) {
        case SchedulingCoder::Kind::affine:
            j["kind"] = "affine";
            j["lin"] = mat_to_json(c.lin);
            j["off"] = vec_to_json(c.off);
            break;
        case SchedulingCoder::Kind::kernel:
            j["kind"] = "kernel";
            j["train_samples"] = mat_to_json(c.train_samples);
            j["alphas"] = mat_to_json(c.alphas);
            j["degree"] = c.degree;
            j["k_row_mean"] = vec_to_json(c.k_row_mean);
            j["k_total_mean"] = c.k_total_mean;
            j["in_mean"] = vec_to_json(c.in_mean);
            j["in_scale"] = vec_to_json(c.in_scale);
            break;
        case SchedulingCoder::Kind::mlp:
            j["kind"] = "mlp";
            j["net"] = mlp_to_json(c.net);
            j["in_mean"] = vec_to_json(c.in_mean);
            j["in_scale"] = vec_to_json(c.in_scale);
            j["out_mean"] = vec_to_json(c.out_mean);
            j["out_scale"] = vec_to_json(c.out_scale);
            break;
    }
    return j;
}

SchedulingCoder coder_from_json(const json& j) {
    SchedulingCoder c;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "affine") {
        c.kind = SchedulingCoder::Kind::affine;
        c.lin = mat_from_json(j.at("lin"));
        c.off = vec_from_json(j.at("off"));
    } else if (kind == "kernel") {
        c.kind = SchedulingCoder::Kind::kernel;
        c.train_samples = mat_from_json(j.at("train_samples"));
        c.alphas = mat_from_json(j.at("alphas"));
        c.degree = j.at("degree").get<double>();
        c.k_row_mean = vec_from_json(j.at("k_row_mean"));
        c.k_total_mean = j.at("k_total_mean").get<double>();
        c.in_mean = vec_from_json(j.at("in_mean"));
        c.in_scale = vec_from_json(j.at("in_scale"));
    } else if (kind == "mlp") {
        c.kind = SchedulingCoder::Kind::mlp;
        c.net = mlp_from_json(j.at("net"));
        c.in_mean = vec_from_json(j.at("in_mean"));
        c.in_scale = vec_from_json(j.at("in_scale"));
        c.out_mean = vec_from_json(j.at("out_mean"));
        c.out_scale = vec_from_json(j.at("out_scale"));
    } else {
        throw std::invalid_argument("unknown coder kind: " + kind);
    }
    return c;
}

json sor_result_to_json(const SorResult& r, double cpu_seconds) {
    json j;
    j["kind"] = "sor";
    j["method"] = r.method;
    j["r_x"] = r.reduced.n_x();
    j["cpu_seconds"] = cpu_seconds;
    j["model"] = model_to_json(r.reduced);
    j["V"] = mat_to_json(r.V);
    j["W"] = mat_to_json(r.W);
    j["hsv"] = vec_to_json(r.hsv);
    j["matched_rank"] = r.matched_rank;
    return j;
}

json sdr_result_to_json(const SdrResult& r, double cpu_seconds) {
    json j;
    j["kind"] = "sdr";
    j["method"] = r.method;
    j["n_phi"] = r.reduced.n_p();
    j["cpu_seconds"] = cpu_seconds;
    j["model"] = model_to_json(r.reduced);
    j["mu"] = coder_to_json(r.mu);
    if (r.mu_inv) j["mu_inv"] = coder_to_json(*r.mu_inv);
    j["diagnostics"] = r.diagnostics;
    return j;
}

ReductionRecord reduction_from_json(const json& j) {
    ReductionRecord rec;
    rec.kind = j.at("kind").get<std::string>();
    rec.cpu_seconds = j.at("cpu_seconds").get<double>();
    if (rec.kind == "sor") {
        SorResult r;
        r.method = j.at("method").get<std::string>();
        r.reduced = model_from_json(j.at("model"));
        r.V = mat_from_json(j.at("V"));
        r.W = mat_from_json(j.at("W"));
        r.hsv = vec_from_json(j.at("hsv"));
        r.matched_rank = j.at("matched_rank").get<int>();
        rec.sor = std::move(r);
    } else if (rec.kind == "sdr") {
        SdrResult r;
        r.method = j.at("method").get<std::string>();
        r.reduced = model_from_json(j.at("model"));
        r.mu = coder_from_json(j.at("mu"));
        if (j.contains("mu_inv")) r.mu_inv = coder_from_json(j.at("mu_inv"));
        r.diagnostics = j.at("diagnostics").get<std::map<std::string, double>>();
        rec.sdr = std::move(r);
    } else {
        throw std::invalid_argument("unknown reduction kind: " + rec.kind);
    }
    return rec;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    f << "t";
    for (int i = 1; i <= traj.u.rows(); ++i) f << ",u" << i;
    for (int i = 1; i <= traj.x.rows(); ++i) f << ",x" << i;
    for (int i = 1; i <= traj.y.rows(); ++i) f << ",y" << i;
    for (int i = 1; i <= traj.p.rows(); ++i) f << ",p" << i;
    f << "\n";
    for (int k = 0; k < traj.length(); ++k) {
        f << fmt_double(k * traj.t_s);
        for (int i = 0; i < traj.u.rows(); ++i) f << "," << fmt_double(traj.u(i, k));
        for (int i = 0; i < traj.x.rows(); ++i) f << "," << fmt_double(traj.x(i, k));
        for (int i = 0; i < traj.y.rows(); ++i) f << "," << fmt_double(traj.y(i, k));
        for (int i = 0; i < traj.p.rows(); ++i) f << "," << fmt_double(traj.p(i, k));
        f << "\n";
    }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

}  // namespace

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path.string());
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty trajectory file: " + path.string());
    int n_u = 0, n_x = 0, n_y = 0, n_p = 0;
    for (const auto& name : split_csv(line)) {
        if (name.empty() || name == "t") continue;
        switch (name[0]) {
            case 'u': ++n_u; break;
            case 'x': ++n_x; break;
            case 'y': ++n_y; break;
            case 'p': ++n_p; break;
            default: throw std::runtime_error("unexpected trajectory column: " + name);
        }
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto items = split_csv(line);
        std::vector<double> row;
        for (const auto& it : items) row.push_back(parse_double(it));
        rows.push_back(std::move(row));
    }
    const int N = static_cast<int>(rows.size());
    Trajectory traj;
    traj.u.resize(n_u, N);
    traj.x.resize(n_x, N);
    traj.y.resize(n_y, N);
    traj.p.resize(n_p, N);
    for (int k = 0; k < N; ++k) {
        const auto& row = rows[static_cast<size_t>(k)];
        if (static_cast<int>(row.size()) != 1 + n_u + n_x + n_y + n_p)
            throw std::runtime_error("trajectory row length mismatch");
        int c = 1;
        for (int i = 0; i < n_u; ++i) traj.u(i, k) = row[static_cast<size_t>(c++)];
        for (int i = 0; i < n_x; ++i) traj.x(i, k) = row[static_cast<size_t>(c++)];
        for (int i = 0; i < n_y; ++i) traj.y(i, k) = row[static_cast<size_t>(c++)];
        for (int i = 0; i < n_p; ++i) traj.p(i, k) = row[static_cast<size_t>(c++)];
    }
    if (N >= 2) traj.t_s = rows[1][0] - rows[0][0];
    return traj;
}

void write_matrix_csv(const std::filesystem::path& path, const std::string& header,
                      const MatrixXd& columns_are_samples) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    f << header << "\n";
    for (int k = 0; k < columns_are_samples.cols(); ++k) {
        for (int i = 0; i < columns_are_samples.rows(); ++i) {
            if (i) f << ",";
            f << fmt_double(columns_are_samples(i, k));
        }
        f << "\n";
    }
}

MatrixXd read_matrix_csv(const std::filesystem::path& path, std::string* header) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path.string());
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty csv: " + path.string());
    if (header) *header = line;
    std::vector<std::vector<double>> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        for (const auto& it : split_csv(line)) row.push_back(parse_double(it));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) return MatrixXd(0, 0);
    const int dim = static_cast<int>(rows[0].size());
    MatrixXd M(dim, static_cast<int>(rows.size()));
    for (size_t k = 0; k < rows.size(); ++k) {
        if (static_cast<int>(rows[k].size()) != dim) throw std::runtime_error("csv row length mismatch");
        for (int i = 0; i < dim; ++i) M(i, static_cast<Eigen::Index>(k)) = rows[k][static_cast<size_t>(i)];
    }
    return M;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path.string());
    return json::parse(f);
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    f << j.dump(2) << "\n";
}

}  // namespace lpvred
