#include "netfbm/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "netfbm/error.hpp"

namespace netfbm {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& allowed_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"graph", {"edges", "n0"}},
        {"coupling", {"B", "C"}},
        {"potential", {"constant", "per_edge", "samples"}},
        {"noise", {"hurst", "normalization", "seed", "formulation", "method"}},
        {"discretization", {"N", "dt", "T", "Tmax", "mc"}},
        {"study", {"name", "alpha", "yosida_n"}},
        {"output", {"dir"}},
    };
    return keys;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(delim, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

double to_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || s.empty()) {
        throw Error(Errc::ParseError, where + ": '" + s + "' is not a number");
    }
    return v;
}

std::uint64_t to_unsigned(const std::string& s, const std::string& where) {
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || s.empty()) {
        throw Error(Errc::ParseError, where + ": '" + s + "' is not a non-negative integer");
    }
    return v;
}

Complex to_complex(const std::string& s, const std::string& where) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) {
        return {to_double(s, where), 0.0};
    }
    return {to_double(trim(s.substr(0, colon)), where), to_double(trim(s.substr(colon + 1)), where)};
}

std::vector<double> to_list(const std::string& s, const std::string& where) {
    std::vector<double> out;
    for (const auto& item : split(s, ',')) {
        out.push_back(to_double(item, where));
    }
    return out;
}

std::vector<std::vector<std::string>> to_rows(const std::string& s, const std::string& where) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& row : split(s, ';')) {
        rows.push_back(split(row, ','));
        if (rows.back().size() != rows.front().size()) {
            throw Error(Errc::ParseError, where + ": rows differ in length");
        }
    }
    return rows;
}

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fmt_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i ? ", " : "") + fmt(v[i]);
    }
    return out;
}

template <typename Cell>
std::string fmt_matrix(Eigen::Index rows, Eigen::Index cols, Cell cell) {
    std::string out;
    for (Eigen::Index i = 0; i < rows; ++i) {
        out += i ? "; " : "";
        for (Eigen::Index j = 0; j < cols; ++j) {
            out += (j ? ", " : "") + cell(i, j);
        }
    }
    return out;
}

class Section {
public:
    Section(const pt::ptree* node, std::string name) : node_(node), name_(std::move(name)) {}

    [[nodiscard]] bool present() const { return node_ != nullptr; }
    [[nodiscard]] bool has(const std::string& key) const { return node_ && node_->find(key) != node_->not_found(); }
    [[nodiscard]] std::string get(const std::string& key) const {
        if (!has(key)) {
            throw Error(Errc::MissingSection, "[" + name_ + "] needs key '" + key + "'");
        }
        return trim(node_->get_child(key).data());
    }
    [[nodiscard]] std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

private:
    const pt::ptree* node_;
    std::string name_;
};

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw Error(Errc::OutOfRange, what);
    }
}

}  // namespace

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    const bool same_b = a.b.rows() == b.b.rows() && a.b.cols() == b.b.cols() && a.b == b.b;
    const bool same_c = a.c.rows() == b.c.rows() && a.c.cols() == b.c.cols() && a.c == b.c;
    return a.edges == b.edges && a.active_count == b.active_count && same_b && same_c && a.potential == b.potential &&
           a.hurst == b.hurst && a.normalization == b.normalization && a.seed == b.seed &&
           a.formulation == b.formulation && a.method == b.method && a.discretization == b.discretization &&
           a.study == b.study && a.output_dir == b.output_dir;
}

const std::vector<std::string>& study_names() {
    static const std::vector<std::string> names{"stability", "convolution", "yosida",
                                                "regularity", "longtime", "fullsystem"};
    return names;
}

ExperimentConfig parse_config(std::string_view text) {
    pt::ptree tree;
    try {
        std::istringstream in{std::string(text)};
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(Errc::ParseError, e.message() + " at line " + std::to_string(e.line()));
    }

    std::map<std::string, const pt::ptree*> sections;
    for (const auto& [name, node] : tree) {
        const auto it = allowed_keys().find(name);
        if (it == allowed_keys().end() || node.empty()) {
            throw Error(Errc::UnknownKey, "unknown section or top-level key '" + name + "'");
        }
        for (const auto& [key, value] : node) {
            if (!it->second.contains(key)) {
                throw Error(Errc::UnknownKey, "unknown key '" + key + "' in [" + name + "]");
            }
        }
        sections[name] = &node;
    }
    auto section = [&](const std::string& name, bool required) {
        const auto it = sections.find(name);
        if (it == sections.end() && required) {
            throw Error(Errc::MissingSection, "missing section [" + name + "]");
        }
        return Section(it == sections.end() ? nullptr : it->second, name);
    };

    ExperimentConfig cfg;

    const Section graph = section("graph", true);
    for (const auto& item : split(graph.get("edges"), ',')) {
        const auto ends = split(item, '-');
        if (ends.size() != 2) {
            throw Error(Errc::ParseError, graph.where("edges") + ": '" + item + "' is not of the form a-b");
        }
        const auto tail = to_unsigned(ends[0], graph.where("edges"));
        const auto head = to_unsigned(ends[1], graph.where("edges"));
        require(tail >= 1 && head >= 1, graph.where("edges") + ": vertex labels start at 1");
        cfg.edges.push_back({tail - 1, head - 1});
    }
    cfg.active_count = to_unsigned(graph.get("n0"), graph.where("n0"));
    require(cfg.active_count >= 1, graph.where("n0") + " must be at least 1");

    const Section coupling = section("coupling", true);
    const auto c_rows = to_rows(coupling.get("C"), coupling.where("C"));
    const auto n = static_cast<Eigen::Index>(c_rows.size());
    cfg.c.resize(n, static_cast<Eigen::Index>(c_rows.front().size()));
    for (Eigen::Index i = 0; i < cfg.c.rows(); ++i) {
        for (Eigen::Index j = 0; j < cfg.c.cols(); ++j) {
            cfg.c(i, j) = to_double(c_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], coupling.where("C"));
        }
    }
    if (coupling.has("B")) {
        const auto b_rows = to_rows(coupling.get("B"), coupling.where("B"));
        cfg.b.resize(static_cast<Eigen::Index>(b_rows.size()), static_cast<Eigen::Index>(b_rows.front().size()));
        for (Eigen::Index i = 0; i < cfg.b.rows(); ++i) {
            for (Eigen::Index j = 0; j < cfg.b.cols(); ++j) {
                cfg.b(i, j) = to_complex(b_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                                         coupling.where("B"));
            }
        }
    } else {
        cfg.b = CMatrix::Zero(n, n);
    }

    const Section potential = section("potential", false);
    const int forms = static_cast<int>(potential.has("constant")) + static_cast<int>(potential.has("per_edge")) +
                      static_cast<int>(potential.has("samples"));
    require(forms <= 1, "[potential] takes exactly one of constant, per_edge, samples");
    if (potential.has("per_edge")) {
        cfg.potential.kind = PotentialConfig::Kind::PerEdge;
        cfg.potential.per_edge = to_list(potential.get("per_edge"), potential.where("per_edge"));
    } else if (potential.has("samples")) {
        cfg.potential.kind = PotentialConfig::Kind::Sampled;
        for (const auto& row : split(potential.get("samples"), ';')) {
            cfg.potential.samples.push_back(to_list(row, potential.where("samples")));
        }
    } else if (potential.has("constant")) {
        cfg.potential.constant = to_double(potential.get("constant"), potential.where("constant"));
    }

    const Section noise = section("noise", true);
    cfg.hurst = to_double(noise.get("hurst"), noise.where("hurst"));
    require(cfg.hurst >= 0.5 && cfg.hurst < 1.0, noise.where("hurst") + " must lie in [0.5, 1)");
    if (noise.has("normalization")) {
        const auto v = noise.get("normalization");
        require(v == "Standard" || v == "PaperPrefactor", noise.where("normalization") + ": unknown value '" + v + "'");
        cfg.normalization = v == "Standard" ? Normalization::Standard : Normalization::PaperPrefactor;
    }
    if (noise.has("seed")) {
        cfg.seed = to_unsigned(noise.get("seed"), noise.where("seed"));
    }
    if (noise.has("formulation")) {
        const auto v = noise.get("formulation");
        require(v == "active" || v == "full", noise.where("formulation") + ": unknown value '" + v + "'");
        cfg.formulation = v == "active" ? Formulation::Active : Formulation::Full;
    }
    if (noise.has("method")) {
        const auto v = noise.get("method");
        require(v == "circulant" || v == "cholesky", noise.where("method") + ": unknown value '" + v + "'");
        cfg.method = v == "circulant" ? SampleMethod::CirculantEmbedding : SampleMethod::Cholesky;
    }

    const Section disc = section("discretization", false);
    auto& d = cfg.discretization;
    if (disc.has("N")) {
        const auto v = to_unsigned(disc.get("N"), disc.where("N"));
        require(v >= 2 && v <= 4096, disc.where("N") + " must lie in [2, 4096]");
        d.subdivisions = static_cast<int>(v);
    }
    if (disc.has("dt")) {
        d.dt = to_double(disc.get("dt"), disc.where("dt"));
    }
    if (disc.has("T")) {
        d.horizon = to_double(disc.get("T"), disc.where("T"));
    }
    if (disc.has("Tmax")) {
        d.long_horizon = to_double(disc.get("Tmax"), disc.where("Tmax"));
    }
    if (disc.has("mc")) {
        d.replicates = to_unsigned(disc.get("mc"), disc.where("mc"));
    }
    require(d.dt > 0.0 && d.horizon > 0.0 && d.dt <= d.horizon, "[discretization] needs 0 < dt <= T");
    require(d.long_horizon > 0.0, "[discretization] Tmax must be positive");
    require(d.replicates >= 2, "[discretization] mc must be at least 2");

    const Section study = section("study", true);
    cfg.study.name = study.get("name");
    const auto& names = study_names();
    require(std::find(names.begin(), names.end(), cfg.study.name) != names.end(),
            study.where("name") + ": unknown study '" + cfg.study.name + "'");
    if (study.has("alpha")) {
        cfg.study.alpha = to_double(study.get("alpha"), study.where("alpha"));
        require(cfg.study.alpha >= 0.0, study.where("alpha") + " must be non-negative");
    }
    if (study.has("yosida_n")) {
        cfg.study.yosida_n = to_list(study.get("yosida_n"), study.where("yosida_n"));
        require(std::is_sorted(cfg.study.yosida_n.begin(), cfg.study.yosida_n.end()) &&
                    cfg.study.yosida_n.front() > 0.0,
                study.where("yosida_n") + " must be positive and increasing");
    }

    const Section output = section("output", false);
    if (output.has("dir")) {
        cfg.output_dir = output.get("dir");
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::Io, "cannot read " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "[graph]\nedges = ";
    for (std::size_t j = 0; j < cfg.edges.size(); ++j) {
        out << (j ? ", " : "") << cfg.edges[j].tail + 1 << '-' << cfg.edges[j].head + 1;
    }
    out << "\nn0 = " << cfg.active_count << "\n\n[coupling]\n";
    out << "B = " << fmt_matrix(cfg.b.rows(), cfg.b.cols(), [&](auto i, auto j) {
        return fmt(cfg.b(i, j).real()) + ":" + fmt(cfg.b(i, j).imag());
    }) << '\n';
    out << "C = " << fmt_matrix(cfg.c.rows(), cfg.c.cols(), [&](auto i, auto j) { return fmt(cfg.c(i, j)); })
        << "\n\n[potential]\n";
    switch (cfg.potential.kind) {
        case PotentialConfig::Kind::Constant:
            out << "constant = " << fmt(cfg.potential.constant) << '\n';
            break;
        case PotentialConfig::Kind::PerEdge:
            out << "per_edge = " << fmt_list(cfg.potential.per_edge) << '\n';
            break;
        case PotentialConfig::Kind::Sampled:
            out << "samples = ";
            for (std::size_t j = 0; j < cfg.potential.samples.size(); ++j) {
                out << (j ? "; " : "") << fmt_list(cfg.potential.samples[j]);
            }
            out << '\n';
            break;
    }
    out << "\n[noise]\nhurst = " << fmt(cfg.hurst) << "\nnormalization = " << to_string(cfg.normalization)
        << "\nseed = " << cfg.seed << "\nformulation = " << to_string(cfg.formulation)
        << "\nmethod = " << (cfg.method == SampleMethod::CirculantEmbedding ? "circulant" : "cholesky") << '\n';
    const auto& d = cfg.discretization;
    out << "\n[discretization]\nN = " << d.subdivisions << "\ndt = " << fmt(d.dt) << "\nT = " << fmt(d.horizon)
        << "\nTmax = " << fmt(d.long_horizon) << "\nmc = " << d.replicates << '\n';
    out << "\n[study]\nname = " << cfg.study.name << "\nalpha = " << fmt(cfg.study.alpha)
        << "\nyosida_n = " << fmt_list(cfg.study.yosida_n) << '\n';
    out << "\n[output]\ndir = " << cfg.output_dir << '\n';
    return out.str();
}

Model build_model(const ExperimentConfig& cfg) {
    NetworkGraph graph = build_graph(cfg.edges, cfg.active_count);
    NodeCoupling coupling = validate_coupling(cfg.b, cfg.c, cfg.active_count);
    EdgePotential potential = [&] {
        switch (cfg.potential.kind) {
            case PotentialConfig::Kind::PerEdge: return EdgePotential::per_edge(cfg.potential.per_edge);
            case PotentialConfig::Kind::Sampled: return EdgePotential::sampled(cfg.potential.samples);
            case PotentialConfig::Kind::Constant: break;
        }
        return EdgePotential::constant(graph.edge_count(), cfg.potential.constant);
    }();
    Mesh mesh = Mesh::uniform(graph, cfg.discretization.subdivisions);
    DiscreteGenerator gen = assemble(graph, coupling, potential, mesh);
    return Model{std::move(graph), std::move(coupling), std::move(potential), std::move(mesh), std::move(gen)};
}

}  // namespace netfbm
