#include "aggnet/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace aggnet {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, sep)) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == sep) {
        out.emplace_back();
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_whitespace(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream stream(s);
    std::string token;
    while (stream >> token) {
        out.push_back(token);
    }
    return out;
}

template <typename T>
T parse_number(const std::string& raw, const std::string& what) {
    const std::string text = trim(raw);
    T value{};
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty()) {
        throw FormatError("cannot parse " + what + " from '" + raw + "'");
    }
    return value;
}

bool next_data_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        line = trim(line);
        if (!line.empty() && line.front() != '#') {
            return true;
        }
    }
    return false;
}

std::string join_doubles(const Vector& v, const std::string& sep) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out += (i ? sep : "") + format_double(v[i]);
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const auto& token : split_whitespace(text)) {
        out.push_back(parse_number<double>(token, what));
    }
    return out;
}

template <typename T>
T required(const boost::property_tree::ptree& tree, const std::string& key) {
    const auto value = tree.get_optional<std::string>(key);
    if (!value) {
        throw FormatError("missing key '" + key + "'");
    }
    if constexpr (std::is_same_v<T, std::string>) {
        return trim(*value);
    } else if constexpr (std::is_same_v<T, bool>) {
        const std::string v = trim(*value);
        if (v == "true" || v == "1") {
            return true;
        }
        if (v == "false" || v == "0") {
            return false;
        }
        throw FormatError("key '" + key + "' must be true or false");
    } else {
        return parse_number<T>(*value, "'" + key + "'");
    }
}

}  // namespace

std::string format_double(double x) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, x);
    if (ec != std::errc()) {
        throw std::runtime_error("cannot format floating-point value");
    }
    return {buffer, ptr};
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << contents;
    out.flush();
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

void write_aggregate_csv(std::ostream& out, const CountMatrix& counts) {
    out << "group";
    for (Eigen::Index b = 0; b < counts.cols(); ++b) {
        out << ',' << b;
    }
    out << '\n';
    for (Eigen::Index a = 0; a < counts.rows(); ++a) {
        out << a;
        for (Eigen::Index b = 0; b < counts.cols(); ++b) {
            out << ',' << counts(a, b);
        }
        out << '\n';
    }
}

CountMatrix read_aggregate_csv(std::istream& in) {
    std::string line;
    if (!next_data_line(in, line)) {
        throw FormatError("aggregate file is empty");
    }
    const auto header = split(line, ',');
    if (header.empty() || trim(header[0]) != "group") {
        throw FormatError("aggregate header must start with 'group'");
    }
    const auto r = static_cast<Eigen::Index>(header.size() - 1);
    for (Eigen::Index b = 0; b < r; ++b) {
        if (parse_number<std::int64_t>(header[static_cast<std::size_t>(b) + 1], "group id") != b) {
            throw FormatError("aggregate header group ids must be 0..r-1 in order");
        }
    }
    CountMatrix counts(r, r);
    Eigen::Index a = 0;
    while (next_data_line(in, line)) {
        const auto fields = split(line, ',');
        if (a >= r) {
            throw FormatError("aggregate file has more rows than groups");
        }
        if (static_cast<Eigen::Index>(fields.size()) != r + 1) {
            throw FormatError("aggregate row " + std::to_string(a) + " has " + std::to_string(fields.size()) +
                              " fields, expected " + std::to_string(r + 1));
        }
        if (parse_number<std::int64_t>(fields[0], "group id") != a) {
            throw FormatError("aggregate rows must be in group order");
        }
        for (Eigen::Index b = 0; b < r; ++b) {
            counts(a, b) = parse_number<std::int64_t>(fields[static_cast<std::size_t>(b) + 1], "count");
        }
        ++a;
    }
    if (a != r) {
        throw FormatError("aggregate file has " + std::to_string(a) + " rows for " + std::to_string(r) + " groups");
    }
    return counts;
}

void write_sizes_csv(std::ostream& out, const std::vector<std::int64_t>& sizes) {
    out << "group_id,n\n";
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        out << g << ',' << sizes[g] << '\n';
    }
}

std::vector<std::int64_t> read_sizes_csv(std::istream& in) {
    std::string line;
    if (!next_data_line(in, line) || line != "group_id,n") {
        throw FormatError("sizes file must start with the header 'group_id,n'");
    }
    std::vector<std::int64_t> sizes;
    while (next_data_line(in, line)) {
        const auto fields = split(line, ',');
        if (fields.size() != 2) {
            throw FormatError("sizes rows must have two fields: '" + line + "'");
        }
        if (parse_number<std::int64_t>(fields[0], "group id") != static_cast<std::int64_t>(sizes.size())) {
            throw FormatError("sizes rows must be in group order starting at 0");
        }
        sizes.push_back(parse_number<std::int64_t>(fields[1], "group size"));
    }
    return sizes;
}

void write_edge_list(std::ostream& out, const CountMatrix& adjacency, NetworkKind kind) {
    for (Eigen::Index j = 0; j < adjacency.cols(); ++j) {
        for (Eigen::Index i = kind.directed ? 0 : j + 1; i < adjacency.rows(); ++i) {
            if (adjacency(i, j) != 0) {
                out << j << ' ' << i << ' ' << adjacency(i, j) << '\n';
            }
        }
    }
}

CountMatrix read_edge_list(std::istream& in, std::size_t nodes, NetworkKind kind) {
    const auto n = static_cast<Eigen::Index>(nodes);
    CountMatrix adjacency = CountMatrix::Zero(n, n);
    std::string line;
    while (next_data_line(in, line)) {
        const auto fields = split_whitespace(line);
        if (fields.size() != 3) {
            throw FormatError("edge lines need 'source target weight': '" + line + "'");
        }
        const auto j = parse_number<Eigen::Index>(fields[0], "source");
        const auto i = parse_number<Eigen::Index>(fields[1], "target");
        const auto w = parse_number<std::int64_t>(fields[2], "weight");
        if (i < 0 || j < 0 || i >= n || j >= n || i == j) {
            throw FormatError("edge endpoints out of range or self-loop: '" + line + "'");
        }
        if (w < 0 || (!kind.weighted && w > 1)) {
            throw FormatError("edge weight not allowed for this network kind: '" + line + "'");
        }
        adjacency(i, j) = w;
        if (!kind.directed) {
            adjacency(j, i) = w;
        }
    }
    return adjacency;
}

void write_labels(std::ostream& out, const std::vector<std::size_t>& labels) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out << i << ' ' << labels[i] << '\n';
    }
}

std::vector<std::size_t> read_labels(std::istream& in) {
    std::vector<std::size_t> labels;
    std::string line;
    while (next_data_line(in, line)) {
        const auto fields = split_whitespace(line);
        if (fields.size() != 2) {
            throw FormatError("label lines need 'node group': '" + line + "'");
        }
        if (parse_number<std::size_t>(fields[0], "node id") != labels.size()) {
            throw FormatError("label lines must list nodes 0..n-1 in order");
        }
        labels.push_back(parse_number<std::size_t>(fields[1], "group id"));
    }
    return labels;
}

void TruthSpec::validate() const {
    params.validate();
    if (sizes.size() != params.groups()) {
        throw FormatError("truth has " + std::to_string(sizes.size()) + " group sizes for " +
                          std::to_string(params.groups()) + " centres");
    }
    group_config().validate();
}

void write_truth_ini(std::ostream& out, const TruthSpec& truth) {
    out << "[model]\n";
    out << "q = " << truth.params.dimension() << '\n';
    out << "directed = " << (truth.kind.directed ? "true" : "false") << '\n';
    out << "weighted = " << (truth.kind.weighted ? "true" : "false") << '\n';
    out << "\n[truth]\n";
    out << "theta = " << format_double(truth.params.theta) << '\n';
    out << "tau = " << format_double(truth.params.tau) << '\n';
    out << "sizes =";
    for (const auto n : truth.sizes) {
        out << ' ' << n;
    }
    out << '\n';
    out << "centres = ";
    for (Eigen::Index a = 0; a < truth.params.mu.rows(); ++a) {
        out << (a ? "; " : "") << join_doubles(truth.params.mu.row(a).transpose(), " ");
    }
    out << '\n';
    out << "scales = " << join_doubles(truth.params.sigma, " ") << '\n';
}

TruthSpec read_truth_ini(std::istream& in) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw FormatError(std::string("truth file: ") + e.what());
    }
    TruthSpec truth;
    const int q = required<int>(tree, "model.q");
    truth.kind.directed = tree.get_optional<std::string>("model.directed") ? required<bool>(tree, "model.directed") : true;
    truth.kind.weighted = tree.get_optional<std::string>("model.weighted") ? required<bool>(tree, "model.weighted") : false;
    truth.params.theta = required<double>(tree, "truth.theta");
    truth.params.tau = tree.get_optional<std::string>("truth.tau") ? required<double>(tree, "truth.tau") : 1.0;
    for (const auto& token : split_whitespace(required<std::string>(tree, "truth.sizes"))) {
        truth.sizes.push_back(parse_number<std::int64_t>(token, "group size"));
    }
    const auto rows = split(required<std::string>(tree, "truth.centres"), ';');
    truth.params.mu.resize(static_cast<Eigen::Index>(rows.size()), q);
    for (std::size_t a = 0; a < rows.size(); ++a) {
        const auto coords = parse_doubles(rows[a], "centre coordinate");
        if (static_cast<int>(coords.size()) != q) {
            throw FormatError("centre " + std::to_string(a) + " has " + std::to_string(coords.size()) +
                              " coordinates, expected q = " + std::to_string(q));
        }
        for (int s = 0; s < q; ++s) {
            truth.params.mu(static_cast<Eigen::Index>(a), s) = coords[static_cast<std::size_t>(s)];
        }
    }
    const auto scales = parse_doubles(required<std::string>(tree, "truth.scales"), "group scale");
    truth.params.sigma = Eigen::Map<const Vector>(scales.data(), static_cast<Eigen::Index>(scales.size()));
    try {
        truth.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("truth file: ") + e.what());
    }
    return truth;
}

std::vector<std::string> natural_parameter_names(std::size_t groups, int q) {
    std::vector<std::string> names;
    for (std::size_t a = 0; a < groups; ++a) {
        for (int s = 0; s < q; ++s) {
            names.push_back("mu_" + std::to_string(a) + "_" + std::to_string(s));
        }
    }
    for (std::size_t a = 0; a < groups; ++a) {
        names.push_back("sigma_" + std::to_string(a));
    }
    names.emplace_back("tau");
    names.emplace_back("theta");
    return names;
}

std::vector<double> flatten_natural(const ModelParams& p) {
    std::vector<double> out;
    for (Eigen::Index a = 0; a < p.mu.rows(); ++a) {
        for (Eigen::Index s = 0; s < p.mu.cols(); ++s) {
            out.push_back(p.mu(a, s));
        }
    }
    for (Eigen::Index a = 0; a < p.sigma.size(); ++a) {
        out.push_back(p.sigma[a]);
    }
    out.push_back(p.tau);
    out.push_back(p.theta);
    return out;
}

ModelParams unflatten_natural(const std::vector<double>& values, std::size_t groups, int q) {
    const auto r = static_cast<Eigen::Index>(groups);
    if (values.size() != groups * static_cast<std::size_t>(q) + groups + 2) {
        throw FormatError("wrong number of natural parameters");
    }
    ModelParams p;
    p.mu.resize(r, q);
    p.sigma.resize(r);
    std::size_t k = 0;
    for (Eigen::Index a = 0; a < r; ++a) {
        for (Eigen::Index s = 0; s < q; ++s) {
            p.mu(a, s) = values[k++];
        }
    }
    for (Eigen::Index a = 0; a < r; ++a) {
        p.sigma[a] = values[k++];
    }
    p.tau = values[k++];
    p.theta = values[k];
    return p;
}

void write_draws(std::ostream& out, const std::vector<DrawRecord>& draws) {
    if (draws.empty()) {
        throw std::invalid_argument("no draws to write");
    }
    out << "chain,draw,log_density";
    for (const auto& name : natural_parameter_names(draws.front().params.groups(), draws.front().params.dimension())) {
        out << ',' << name;
    }
    out << '\n';
    for (const auto& d : draws) {
        out << d.chain << ',' << d.draw << ',' << format_double(d.log_density);
        for (const double v : flatten_natural(d.params)) {
            out << ',' << format_double(v);
        }
        out << '\n';
    }
}

std::vector<DrawRecord> read_draws(std::istream& in, std::size_t groups, int q) {
    std::string line;
    if (!next_data_line(in, line)) {
        throw FormatError("draw file is empty");
    }
    std::string expected = "chain,draw,log_density";
    for (const auto& name : natural_parameter_names(groups, q)) {
        expected += "," + name;
    }
    if (line != expected) {
        throw FormatError("draw file header does not match " + std::to_string(groups) + " groups in q = " +
                          std::to_string(q));
    }
    std::vector<DrawRecord> draws;
    while (next_data_line(in, line)) {
        const auto fields = split(line, ',');
        if (fields.size() < 3) {
            throw FormatError("short draw row");
        }
        DrawRecord d;
        d.chain = parse_number<std::size_t>(fields[0], "chain id");
        d.draw = parse_number<std::size_t>(fields[1], "draw index");
        d.log_density = parse_number<double>(fields[2], "log density");
        std::vector<double> values;
        for (std::size_t k = 3; k < fields.size(); ++k) {
            values.push_back(parse_number<double>(fields[k], "parameter value"));
        }
        d.params = unflatten_natural(values, groups, q);
        draws.push_back(std::move(d));
    }
    return draws;
}

std::vector<DrawRecord> chain_records(const PosteriorChain& chain) {
    std::vector<DrawRecord> out;
    for (std::size_t i = 0; i < chain.draws.size(); ++i) {
        out.push_back({chain.chain_id, i, chain.log_densities[i], to_natural(chain.draws[i])});
    }
    return out;
}

std::vector<DrawRecord> aligned_records(const AlignedPosterior& aligned, std::size_t chain_id) {
    std::vector<DrawRecord> out;
    for (std::size_t i = 0; i < aligned.size(); ++i) {
        ModelParams p{aligned.mu[i], aligned.sigma[i], aligned.tau[i], aligned.theta[i]};
        out.push_back({chain_id, i, aligned.log_densities[i], std::move(p)});
    }
    return out;
}

void write_summary_csv(std::ostream& out, const PosteriorSummary& summary) {
    out << "parameter,mean,median,lower,upper\n";
    for (const auto& p : summary.parameters) {
        out << p.name << ',' << format_double(p.mean) << ',' << format_double(p.median) << ','
            << format_double(p.lower) << ',' << format_double(p.upper) << '\n';
    }
}

}  // namespace aggnet
