#pragma once

#include "kaczmarz/matrix.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace kaczmarz {

struct ReadOptions {
    /// Matrices at or above this fill fraction are stored dense.
    double dense_threshold = 0.05;
};

/// Coordinate or array MatrixMarket; real, integer or pattern; general or
/// symmetric. Duplicate coordinate entries are summed. Throws DataError with
/// the offending line number on malformed input.
Matrix read_matrix_market(const std::filesystem::path& path, const ReadOptions& opts = {});
Matrix parse_matrix_market(const std::string& text, const ReadOptions& opts = {});

/// Coordinate general real, 17 significant digits.
void write_matrix_market(const Matrix& m, const std::filesystem::path& path);
std::string format_matrix_market(const Matrix& m);

/// One-column array MatrixMarket, or plain text with one value per line.
Vector read_vector(const std::filesystem::path& path);
Vector parse_vector(const std::string& text);
/// Array-format MatrixMarket with one column.
void write_vector(const Vector& v, const std::filesystem::path& path);

using Metadata = std::map<std::string, std::string>;
void write_metadata(const Metadata& meta, const std::filesystem::path& path);
/// Lines of `key=value`; '#' starts a comment line.
Metadata read_metadata(const std::filesystem::path& path);

std::string format_double(double v);

} // namespace kaczmarz
