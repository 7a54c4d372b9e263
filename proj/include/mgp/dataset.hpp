#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace mgp {

/// How a simulated dataset was produced.
struct GeneratorRecord {
    std::string tag;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    double lo = 0.0;
    double hi = 1.0;
};

struct Dataset {
    Eigen::MatrixXd X;  ///< n x d
    Eigen::VectorXd y;  ///< n
    std::optional<GeneratorRecord> generator;

    Eigen::Index size() const { return X.rows(); }
    Eigen::Index dim() const { return X.cols(); }
    /// Throws InvalidArgument on empty data, shape mismatch or NaN/Inf.
    void validate() const;
};

/// Noise-free generator function for a tag in {sin2x, quadratic, linear}.
double generator_truth(std::string_view tag, double x);
bool is_generator_tag(std::string_view tag);

/// x ~ U[lo, hi], y = f(x) + N(0, sigma^2); deterministic in seed.
Dataset simulate(std::string_view tag, Eigen::Index n, double sigma, std::uint64_t seed, double lo, double hi);

/// CSV with header `x1,...,xd,y`.
Dataset load_csv(const std::filesystem::path& path);
Dataset parse_csv(std::string_view text, const std::string& source = "<memory>");
void save_csv(const Dataset& data, const std::filesystem::path& path);
std::string to_csv(const Dataset& data);

/// printf %.17g, which round-trips every double.
std::string format_double(double v);

/// Reads a whole file; throws ParseError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);
/// Writes a whole file, creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace mgp
