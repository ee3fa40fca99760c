#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "classgain/types.hpp"

namespace classgain {

// Unreadable or malformed input files.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- plain files ---------------------------------------------------------

// Writes via a temporary file in the same directory plus rename, so readers
// never observe a partial file.
void atomic_write_file(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

// FNV-1a 64-bit content digest, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

// --- CSV signals and labels ----------------------------------------------

// One value per line. Round-trips doubles exactly (hex-free shortest form).
std::string signal_to_csv(const std::vector<double>& values);
std::vector<double> signal_from_csv(const std::string& text);

// One label per line, written one-based.
std::string labels_to_csv(const ClassificationScheme& scheme);
ClassificationScheme labels_from_csv(const std::string& text, std::size_t num_classes);

// --- PGM images ------------------------------------------------------------

struct PgmImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;  // row-major
};

struct PgmScale {
    double offset = 0.0;  // value of pixel 0
    double step = 1.0;    // value increment per grey level
};

std::string pgm_to_bytes(const PgmImage& image);
PgmImage pgm_from_bytes(const std::string& bytes);

// Quantizes a grid signal to 8 bits over its value range; the scale lets the
// values be recovered to within step/2.
std::pair<PgmImage, PgmScale> quantize_to_pgm(const SampleSet& x);
SampleSet dequantize_pgm(const PgmImage& image, const PgmScale& scale);

// Class labels rendered as grey levels spread over 0..255.
PgmImage labels_to_pgm(const ClassificationScheme& scheme, const SignalShape& shape);

// --- mixture spec text config ----------------------------------------------

struct GenConfig {
    MixtureSpec mixture;
    std::size_t n = 0;
    SignalShape shape = SignalShape::linear(1);
};

// Line-oriented `key = value` format with `class <i> mean=... var=...` rows.
// Throws data_error with the offending line number.
GenConfig parse_mixture_config(const std::string& text);
std::string mixture_config_to_text(const GenConfig& config);

// --- SVG figures -----------------------------------------------------------

// Signal trace above a class-colored strip.
std::string svg_signal_strip(const SampleSet& x, const ClassificationScheme& labels);
// Side-by-side greyscale image and class-colored label grid.
std::string svg_grid_pair(const SampleSet& x, const ClassificationScheme& labels);

}  // namespace classgain
