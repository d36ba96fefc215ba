#pragma once

#include "aggnet/inference.hpp"
#include "aggnet/likelihood.hpp"
#include "aggnet/model.hpp"
#include "aggnet/simulate.hpp"
#include "aggnet/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace aggnet {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed file contents or configuration values.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest text that parses back to exactly the same double.
std::string format_double(double x);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& contents);

// Aggregate matrix: header "group,0,1,...,r-1", then one row per group.
void write_aggregate_csv(std::ostream& out, const CountMatrix& counts);
CountMatrix read_aggregate_csv(std::istream& in);

// Group sizes: header "group_id,n", then "a,n_a" rows in group order.
void write_sizes_csv(std::ostream& out, const std::vector<std::int64_t>& sizes);
std::vector<std::int64_t> read_sizes_csv(std::istream& in);

// Edge list: "source target weight" per line; y_ij is the edge j -> i, so
// source j and target i. Undirected edges appear once with source < target.
void write_edge_list(std::ostream& out, const CountMatrix& adjacency, NetworkKind kind);
CountMatrix read_edge_list(std::istream& in, std::size_t nodes, NetworkKind kind);

// Labels: "node group" per line.
void write_labels(std::ostream& out, const std::vector<std::size_t>& labels);
std::vector<std::size_t> read_labels(std::istream& in);

/// Generating parameters of a synthetic network.
struct TruthSpec {
    ModelParams params;
    std::vector<std::int64_t> sizes;
    NetworkKind kind;

    GroupConfig group_config() const { return params.group_config(sizes); }
    void validate() const;
};

// INI layout: [model] q, directed, weighted; [truth] theta, tau, sizes,
// centres (rows separated by ';'), scales.
void write_truth_ini(std::ostream& out, const TruthSpec& truth);
TruthSpec read_truth_ini(std::istream& in);

std::vector<std::string> natural_parameter_names(std::size_t groups, int q);
std::vector<double> flatten_natural(const ModelParams& p);
ModelParams unflatten_natural(const std::vector<double>& values, std::size_t groups, int q);

/// One row of a draw file: natural parameters of a single posterior draw.
struct DrawRecord {
    std::size_t chain = 0;
    std::size_t draw = 0;
    double log_density = 0.0;
    ModelParams params;
};

// Draw file: header "chain,draw,log_density,<parameter names>".
void write_draws(std::ostream& out, const std::vector<DrawRecord>& draws);
std::vector<DrawRecord> read_draws(std::istream& in, std::size_t groups, int q);

std::vector<DrawRecord> chain_records(const PosteriorChain& chain);
std::vector<DrawRecord> aligned_records(const AlignedPosterior& aligned, std::size_t chain_id);

// Summary table: "parameter,mean,median,lower,upper".
void write_summary_csv(std::ostream& out, const PosteriorSummary& summary);

}  // namespace aggnet
