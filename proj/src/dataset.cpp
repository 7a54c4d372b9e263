#include "mgp/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "mgp/error.hpp"
#include "mgp/rng.hpp"

namespace mgp {

namespace {

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

void Dataset::validate() const
{
    if (X.rows() < 1) throw InvalidArgument("dataset is empty");
    if (X.cols() < 1) throw InvalidArgument("dataset has no input columns");
    if (y.size() != X.rows()) throw InvalidArgument("dataset: X and y lengths differ");
    if (!X.allFinite() || !y.allFinite()) throw InvalidArgument("dataset contains NaN or Inf");
}

bool is_generator_tag(std::string_view tag) { return tag == "sin2x" || tag == "quadratic" || tag == "linear"; }

double generator_truth(std::string_view tag, double x)
{
    if (tag == "sin2x") return std::sin(2.0 * x);
    if (tag == "quadratic") return x * x;
    if (tag == "linear") return x;
    throw InvalidArgument("unknown generator tag '" + std::string(tag) + "'");
}

Dataset simulate(std::string_view tag, Eigen::Index n, double sigma, std::uint64_t seed, double lo, double hi)
{
    if (!is_generator_tag(tag)) throw InvalidArgument("unknown generator tag '" + std::string(tag) + "'");
    if (n < 1) throw InvalidArgument("simulate: n must be at least 1");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("simulate: sigma must be nonnegative");
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw InvalidArgument("simulate: invalid range [" + format_double(lo) + ", " + format_double(hi) + "]");

    const CounterRng root(seed);
    CounterRng xs = root.split(0);
    CounterRng noise = root.split(1);
    Dataset d{Eigen::MatrixXd(n, 1), Eigen::VectorXd(n), GeneratorRecord{std::string(tag), sigma, seed, lo, hi}};
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = xs.uniform(lo, hi);
        d.X(i, 0) = x;
        d.y[i] = generator_truth(tag, x) + sigma * noise.normal();
    }
    return d;
}

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write '" + path.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw ParseError("failed writing '" + path.string() + "'");
}

Dataset parse_csv(std::string_view text, const std::string& source)
{
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw ParseError(source + ": empty file");

    const auto header = split_fields(trim(lines.front()));
    const auto cols = header.size();
    if (cols < 2 || trim(header.back()) != "y")
        throw ParseError(source + ":1: header must be x1,...,xd,y");
    for (std::size_t j = 0; j + 1 < cols; ++j)
        if (trim(header[j]) != "x" + std::to_string(j + 1))
            throw ParseError(source + ":1: expected column 'x" + std::to_string(j + 1) + "'");
    if (lines.size() < 2) throw ParseError(source + ": no data rows");

    const auto n = static_cast<Eigen::Index>(lines.size() - 1);
    const auto d = static_cast<Eigen::Index>(cols - 1);
    Dataset data{Eigen::MatrixXd(n, d), Eigen::VectorXd(n), std::nullopt};
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::string line_no = source + ":" + std::to_string(i + 2);
        const auto fields = split_fields(trim(lines[i + 1]));
        if (fields.size() != cols)
            throw ParseError(line_no + ": expected " + std::to_string(cols) + " fields, got " +
                             std::to_string(fields.size()));
        for (std::size_t j = 0; j < cols; ++j) {
            const auto f = trim(fields[j]);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc() || ptr != f.data() + f.size() || f.empty())
                throw ParseError(line_no + ": malformed number '" + std::string(f) + "'");
            if (!std::isfinite(v)) throw ParseError(line_no + ": non-finite value '" + std::string(f) + "'");
            if (j + 1 < cols) data.X(i, static_cast<Eigen::Index>(j)) = v;
            else data.y[i] = v;
        }
    }
    return data;
}

Dataset load_csv(const std::filesystem::path& path) { return parse_csv(read_file(path), path.string()); }

std::string to_csv(const Dataset& data)
{
    data.validate();
    std::string out;
    for (Eigen::Index j = 0; j < data.dim(); ++j) out += "x" + std::to_string(j + 1) + ",";
    out += "y\n";
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        for (Eigen::Index j = 0; j < data.dim(); ++j) out += format_double(data.X(i, j)) + ",";
        out += format_double(data.y[i]) + "\n";
    }
    return out;
}

void save_csv(const Dataset& data, const std::filesystem::path& path) { write_file(path, to_csv(data)); }

}  // namespace mgp
