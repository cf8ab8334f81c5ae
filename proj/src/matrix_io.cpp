#include "kaczmarz/matrix_io.hpp"

#include "kaczmarz/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

namespace kaczmarz {

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("write failed: " + path.string());
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw DataError("line " + std::to_string(line) + ": " + what);
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

bool blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

double parse_real(std::string_view tok, std::size_t line) {
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty())
        fail(line, "not a number: '" + std::string(tok) + "'");
    if (!std::isfinite(v)) fail(line, "non-finite value");
    return v;
}

std::size_t parse_index(std::string_view tok, std::size_t line) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty())
        fail(line, "not a non-negative integer: '" + std::string(tok) + "'");
    return v;
}

// Iterates over lines with 1-based numbering.
class LineReader {
public:
    explicit LineReader(const std::string& text) : text_(text) {}

    bool next(std::string_view& line) {
        if (pos_ >= text_.size()) return false;
        std::size_t end = text_.find('\n', pos_);
        if (end == std::string::npos) end = text_.size();
        line = std::string_view(text_).substr(pos_, end - pos_);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos_ = end + 1;
        ++number_;
        return true;
    }
    std::size_t number() const { return number_; }

private:
    const std::string& text_;
    std::size_t pos_ = 0;
    std::size_t number_ = 0;
};

// Next line that is neither blank nor a '%' comment.
bool next_data_line(LineReader& r, std::string_view& line) {
    while (r.next(line))
        if (!blank(line) && line.find_first_not_of(" \t") != std::string_view::npos &&
            line[line.find_first_not_of(" \t")] != '%')
            return true;
    return false;
}

struct Header {
    bool coordinate = true;
    bool pattern = false;
    bool symmetric = false;
};

Header parse_banner(std::string_view line) {
    const auto tok = split_ws(line);
    if (tok.size() != 5 || tok[0] != "%%MatrixMarket") fail(1, "malformed MatrixMarket banner");
    if (lower(tok[1]) != "matrix") fail(1, "unsupported object '" + std::string(tok[1]) + "'");
    Header h;
    const std::string format = lower(tok[2]);
    if (format == "coordinate") h.coordinate = true;
    else if (format == "array") h.coordinate = false;
    else fail(1, "unsupported format '" + std::string(tok[2]) + "'");
    const std::string field = lower(tok[3]);
    if (field == "pattern") h.pattern = true;
    else if (field != "real" && field != "integer" && field != "double")
        fail(1, "unsupported field '" + std::string(tok[3]) + "'");
    if (h.pattern && !h.coordinate) fail(1, "pattern field requires coordinate format");
    const std::string sym = lower(tok[4]);
    if (sym == "symmetric") h.symmetric = true;
    else if (sym != "general") fail(1, "unsupported symmetry '" + std::string(tok[4]) + "'");
    return h;
}

Matrix materialize(std::size_t rows, std::size_t cols, std::vector<Triplet> entries, const ReadOptions& opts) {
    Matrix sparse = Matrix::from_triplets(rows, cols, std::move(entries));
    const double fill = static_cast<double>(sparse.nnz()) / (static_cast<double>(rows) * static_cast<double>(cols));
    return fill >= opts.dense_threshold ? sparse.to_dense() : sparse;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 16);
    return std::string(buf, res.ptr);
}

Matrix parse_matrix_market(const std::string& text, const ReadOptions& opts) {
    LineReader reader(text);
    std::string_view line;
    if (!reader.next(line)) fail(1, "empty file");
    const Header h = parse_banner(line);

    if (!next_data_line(reader, line)) fail(reader.number(), "missing size line");
    const std::size_t size_line = reader.number();
    const auto dims = split_ws(line);
    if (dims.size() != (h.coordinate ? 3u : 2u)) fail(size_line, "malformed size line");
    const std::size_t rows = parse_index(dims[0], size_line);
    const std::size_t cols = parse_index(dims[1], size_line);
    if (rows == 0 || cols == 0) fail(size_line, "dimensions must be positive");
    if (h.symmetric && rows != cols) fail(size_line, "symmetric matrix must be square");

    std::vector<Triplet> entries;
    if (h.coordinate) {
        const std::size_t declared = parse_index(dims[2], size_line);
        entries.reserve(h.symmetric ? 2 * declared : declared);
        std::size_t seen = 0;
        while (next_data_line(reader, line)) {
            const std::size_t ln = reader.number();
            const auto tok = split_ws(line);
            if (tok.size() != (h.pattern ? 2u : 3u)) fail(ln, "expected " + std::string(h.pattern ? "2" : "3") + " fields");
            const std::size_t i = parse_index(tok[0], ln);
            const std::size_t j = parse_index(tok[1], ln);
            if (i < 1 || i > rows || j < 1 || j > cols)
                fail(ln, "index (" + std::to_string(i) + "," + std::to_string(j) + ") outside declared " +
                             std::to_string(rows) + "x" + std::to_string(cols));
            if (h.symmetric && j > i) fail(ln, "symmetric storage must hold the lower triangle");
            const double v = h.pattern ? 1.0 : parse_real(tok[2], ln);
            if (++seen > declared) fail(ln, "more entries than declared");
            entries.push_back({i - 1, j - 1, v});
            if (h.symmetric && i != j) entries.push_back({j - 1, i - 1, v});
        }
        if (seen != declared)
            fail(reader.number(), "expected " + std::to_string(declared) + " entries, found " + std::to_string(seen));
    } else {
        // Column-major values; symmetric array files store the lower triangle.
        for (std::size_t j = 0; j < cols; ++j) {
            for (std::size_t i = h.symmetric ? j : 0; i < rows; ++i) {
                if (!next_data_line(reader, line)) fail(reader.number(), "too few array values");
                const std::size_t ln = reader.number();
                const auto tok = split_ws(line);
                if (tok.size() != 1) fail(ln, "expected 1 field");
                const double v = parse_real(tok[0], ln);
                if (v == 0.0) continue;
                entries.push_back({i, j, v});
                if (h.symmetric && i != j) entries.push_back({j, i, v});
            }
        }
        if (next_data_line(reader, line)) fail(reader.number(), "too many array values");
    }
    return materialize(rows, cols, std::move(entries), opts);
}

Matrix read_matrix_market(const std::filesystem::path& path, const ReadOptions& opts) {
    try {
        return parse_matrix_market(slurp(path), opts);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string format_matrix_market(const Matrix& m) {
    const Matrix s = m.is_sparse() ? m : m.to_sparse();
    std::string out = "%%MatrixMarket matrix coordinate real general\n";
    out += std::to_string(s.rows()) + " " + std::to_string(s.cols()) + " " + std::to_string(s.nnz()) + "\n";
    const auto offsets = s.csr_offsets();
    const auto indices = s.csr_indices();
    const auto values = s.csr_values();
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t p = offsets[i]; p < offsets[i + 1]; ++p)
            out += std::to_string(i + 1) + " " + std::to_string(indices[p] + 1) + " " + format_double(values[p]) + "\n";
    return out;
}

void write_matrix_market(const Matrix& m, const std::filesystem::path& path) { spit(path, format_matrix_market(m)); }

Vector parse_vector(const std::string& text) {
    LineReader reader(text);
    std::string_view line;
    Vector out;
    if (text.rfind("%%MatrixMarket", 0) == 0) {
        reader.next(line);
        const Header h = parse_banner(line);
        if (h.coordinate) {
            const Matrix m = parse_matrix_market(text, {1.0});
            if (m.cols() != 1) fail(1, "vector file must have one column");
            const std::vector<double> dense = m.to_dense_col_major();
            return dense;
        }
        if (!next_data_line(reader, line)) fail(reader.number(), "missing size line");
        const std::size_t size_line = reader.number();
        const auto dims = split_ws(line);
        if (dims.size() != 2) fail(size_line, "malformed size line");
        const std::size_t rows = parse_index(dims[0], size_line);
        if (parse_index(dims[1], size_line) != 1) fail(size_line, "vector file must have one column");
        out.reserve(rows);
        while (next_data_line(reader, line)) {
            const auto tok = split_ws(line);
            if (tok.size() != 1) fail(reader.number(), "expected 1 field");
            out.push_back(parse_real(tok[0], reader.number()));
        }
        if (out.size() != rows)
            fail(reader.number(), "expected " + std::to_string(rows) + " values, found " + std::to_string(out.size()));
        return out;
    }
    while (reader.next(line)) {
        if (blank(line) || line[line.find_first_not_of(" \t")] == '#') continue;
        const auto tok = split_ws(line);
        if (tok.size() != 1) fail(reader.number(), "expected one value per line");
        out.push_back(parse_real(tok[0], reader.number()));
    }
    return out;
}

Vector read_vector(const std::filesystem::path& path) {
    try {
        return parse_vector(slurp(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_vector(const Vector& v, const std::filesystem::path& path) {
    std::string out = "%%MatrixMarket matrix array real general\n";
    out += std::to_string(v.size()) + " 1\n";
    for (double x : v) out += format_double(x) + "\n";
    spit(path, out);
}

void write_metadata(const Metadata& meta, const std::filesystem::path& path) {
    std::string out;
    for (const auto& [k, v] : meta) out += k + "=" + v + "\n";
    spit(path, out);
}

Metadata read_metadata(const std::filesystem::path& path) {
    const std::string text = slurp(path);
    LineReader reader(text);
    std::string_view line;
    Metadata out;
    while (reader.next(line)) {
        if (blank(line) || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) fail(reader.number(), "expected key=value");
        out[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
    }
    return out;
}

} // namespace kaczmarz
