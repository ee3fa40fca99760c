#include "classgain/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace classgain {

namespace fs = std::filesystem;

void atomic_write_file(const fs::path& path, const std::string& contents) {
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    fs::path tmp = dir / (path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw data_error("cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw data_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw data_error("cannot rename " + tmp.string() + " to " + path.string());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return out;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    // Shortest representation that round-trips a double.
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

double parse_double(const std::string& token, std::size_t line) {
    double v = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) {
        throw data_error("line " + std::to_string(line) + ": expected a number, got '" +
                         token + "'");
    }
    return v;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::size_t parse_count(const std::string& token, std::size_t line) {
    const double v = parse_double(token, line);
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e12) {
        throw data_error("line " + std::to_string(line) +
                         ": expected a positive integer, got '" + token + "'");
    }
    return static_cast<std::size_t>(v);
}

}  // namespace

std::string signal_to_csv(const std::vector<double>& values) {
    std::string out;
    for (double v : values) {
        out += format_double(v);
        out += '\n';
    }
    return out;
}

std::vector<double> signal_from_csv(const std::string& text) {
    std::vector<double> values;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string token = trim(line);
        if (token.empty() || token[0] == '#') continue;
        values.push_back(parse_double(token, line_no));
    }
    if (values.empty()) throw data_error("signal file contains no values");
    return values;
}

std::string labels_to_csv(const ClassificationScheme& scheme) {
    std::string out;
    for (std::size_t k = 0; k < scheme.size(); ++k) {
        out += std::to_string(scheme[k] + 1);
        out += '\n';
    }
    return out;
}

ClassificationScheme labels_from_csv(const std::string& text, std::size_t num_classes) {
    std::vector<int> labels;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    int max_label = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string token = trim(line);
        if (token.empty() || token[0] == '#') continue;
        int v = 0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (ec != std::errc() || ptr != token.data() + token.size() || v < 1) {
            throw data_error("line " + std::to_string(line_no) +
                             ": expected a one-based class label, got '" + token + "'");
        }
        max_label = std::max(max_label, v);
        labels.push_back(v - 1);
    }
    if (labels.empty()) throw data_error("label file contains no labels");
    const std::size_t j = num_classes > 0 ? num_classes : static_cast<std::size_t>(max_label);
    if (static_cast<std::size_t>(max_label) > j) {
        throw data_error("label " + std::to_string(max_label) + " exceeds class count " +
                         std::to_string(j));
    }
    return ClassificationScheme(std::move(labels), j);
}

std::string pgm_to_bytes(const PgmImage& image) {
    if (image.pixels.size() != image.width * image.height) {
        throw data_error("pgm pixel count does not match dimensions");
    }
    std::string out = "P5\n" + std::to_string(image.width) + " " +
                      std::to_string(image.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
    return out;
}

PgmImage pgm_from_bytes(const std::string& bytes) {
    std::istringstream in(bytes);
    std::string magic;
    in >> magic;
    if (magic != "P5") throw data_error("unsupported image format (want binary P5 PGM)");
    std::size_t width = 0, height = 0, maxval = 0;
    // Header tokens may be separated by whitespace or comment lines.
    const auto next_token = [&]() -> std::size_t {
        for (;;) {
            in >> std::ws;
            if (in.peek() == '#') {
                std::string comment;
                std::getline(in, comment);
                continue;
            }
            std::size_t value = 0;
            if (!(in >> value)) throw data_error("truncated pgm header");
            return value;
        }
    };
    width = next_token();
    height = next_token();
    maxval = next_token();
    if (width == 0 || height == 0) throw data_error("pgm has zero dimensions");
    if (maxval != 255) throw data_error("only 8-bit pgm supported");
    in.get();  // single whitespace after maxval
    PgmImage image{width, height, {}};
    image.pixels.resize(width * height);
    in.read(reinterpret_cast<char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != image.pixels.size()) {
        throw data_error("truncated pgm pixel data");
    }
    return image;
}

std::pair<PgmImage, PgmScale> quantize_to_pgm(const SampleSet& x) {
    if (!x.shape().is_grid()) throw data_error("pgm output requires a grid signal");
    PgmScale scale;
    scale.offset = x.min_value();
    scale.step = x.value_range() > 0.0 ? x.value_range() / 255.0 : 1.0;
    PgmImage image{x.shape().width(), x.shape().height(), {}};
    image.pixels.resize(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double level = std::round((x[k] - scale.offset) / scale.step);
        image.pixels[k] = static_cast<std::uint8_t>(std::clamp(level, 0.0, 255.0));
    }
    return {std::move(image), scale};
}

SampleSet dequantize_pgm(const PgmImage& image, const PgmScale& scale) {
    std::vector<double> values(image.pixels.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
        values[k] = scale.offset + scale.step * static_cast<double>(image.pixels[k]);
    }
    return SampleSet(std::move(values), SignalShape::grid(image.height, image.width));
}

PgmImage labels_to_pgm(const ClassificationScheme& scheme, const SignalShape& shape) {
    if (shape.size() != scheme.size()) throw data_error("label count must match shape");
    const std::size_t j = scheme.num_classes();
    PgmImage image{shape.width(), shape.height(), {}};
    image.pixels.resize(scheme.size());
    for (std::size_t k = 0; k < scheme.size(); ++k) {
        const double level =
            j > 1 ? 255.0 * static_cast<double>(scheme[k]) / static_cast<double>(j - 1) : 0.0;
        image.pixels[k] = static_cast<std::uint8_t>(std::lround(level));
    }
    return image;
}

GenConfig parse_mixture_config(const std::string& text) {
    GenConfig config;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;

    std::size_t declared_classes = 0;
    std::vector<std::pair<std::size_t, MixtureComponent>> class_lines;
    std::string layout = "blocks";
    std::vector<BlockRun> runs;
    bool have_n = false;
    bool grid = false;
    std::size_t grid_h = 0, grid_w = 0;
    bool any_content = false;

    const auto fail = [&](const std::string& message) -> void {
        throw data_error("line " + std::to_string(line_no) + ": " + message);
    };

    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        any_content = true;

        if (line.rfind("class ", 0) == 0) {
            std::istringstream ls(line.substr(6));
            std::size_t index = 0;
            if (!(ls >> index) || index < 1) fail("class line needs a one-based index");
            MixtureComponent comp;
            comp.weight = 0.0;
            std::string kv;
            while (ls >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) fail("expected key=value, got '" + kv + "'");
                const std::string key = kv.substr(0, eq);
                const double value = parse_double(kv.substr(eq + 1), line_no);
                if (key == "mean") {
                    comp.mean = value;
                } else if (key == "var") {
                    comp.variance = value;
                } else if (key == "weight") {
                    comp.weight = value;
                } else {
                    fail("unknown class key '" + key + "'");
                }
            }
            class_lines.emplace_back(index - 1, comp);
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "classes") {
            declared_classes = parse_count(value, line_no);
        } else if (key == "n") {
            config.n = parse_count(value, line_no);
            have_n = true;
        } else if (key == "seed") {
            config.mixture.seed = static_cast<std::uint64_t>(parse_double(value, line_no));
        } else if (key == "layout") {
            if (value != "blocks" && value != "iid") fail("layout must be blocks or iid");
            layout = value;
        } else if (key == "shape") {
            if (value == "linear") {
                grid = false;
            } else if (value.rfind("grid", 0) == 0) {
                grid = true;
                std::string dims = trim(value.substr(4));
                const auto x_pos = dims.find('x');
                if (x_pos == std::string::npos) fail("grid shape needs HxW");
                grid_h = parse_count(trim(dims.substr(0, x_pos)), line_no);
                grid_w = parse_count(trim(dims.substr(x_pos + 1)), line_no);
            } else {
                fail("shape must be linear or grid HxW");
            }
        } else if (key == "blocks") {
            std::istringstream bs(value);
            std::string token;
            while (bs >> token) {
                if (!token.empty() && token.back() == ',') token.pop_back();
                if (token.empty()) continue;
                const auto colon = token.find(':');
                if (colon == std::string::npos) fail("block token needs class:length");
                const std::size_t cls = parse_count(token.substr(0, colon), line_no);
                const std::size_t len = parse_count(token.substr(colon + 1), line_no);
                runs.push_back({cls - 1, len});
            }
        } else {
            fail("unknown key '" + key + "'");
        }
    }

    line_no = 0;  // subsequent errors are file-level
    if (!any_content) throw data_error("config file is empty");
    if (!have_n) throw data_error("config missing 'n'");
    if (class_lines.empty()) throw data_error("config declares no classes");

    const std::size_t j = declared_classes > 0 ? declared_classes : class_lines.size();
    config.mixture.components.assign(j, MixtureComponent{0.0, 1.0, 0.0});
    std::vector<bool> seen(j, false);
    for (const auto& [index, comp] : class_lines) {
        if (index >= j) {
            throw data_error("class index " + std::to_string(index + 1) +
                             " exceeds declared class count " + std::to_string(j));
        }
        config.mixture.components[index] = comp;
        seen[index] = true;
    }
    for (std::size_t i = 0; i < j; ++i) {
        if (!seen[i]) throw data_error("class " + std::to_string(i + 1) + " not defined");
    }

    if (layout == "blocks") {
        if (runs.empty()) throw data_error("blocks layout requires a 'blocks' line");
        config.mixture.layout = BlocksLayout{std::move(runs)};
        // Weights are implied by run lengths when omitted.
        bool any_weight = false;
        for (const auto& c : config.mixture.components) any_weight |= c.weight > 0.0;
        if (!any_weight) {
            std::vector<double> totals(j, 0.0);
            for (const auto& run : std::get<BlocksLayout>(config.mixture.layout).runs) {
                totals[run.class_index] += static_cast<double>(run.length);
            }
            for (std::size_t i = 0; i < j; ++i) {
                config.mixture.components[i].weight =
                    totals[i] / static_cast<double>(config.n);
            }
        }
    } else {
        config.mixture.layout = IidLayout{};
    }

    config.shape = grid ? SignalShape::grid(grid_h, grid_w) : SignalShape::linear(config.n);
    if (config.shape.size() != config.n) {
        throw data_error("shape size does not match n");
    }
    config.mixture.validate(config.n);
    return config;
}

std::string mixture_config_to_text(const GenConfig& config) {
    std::ostringstream out;
    out << "classes = " << config.mixture.num_classes() << "\n";
    out << "n = " << config.n << "\n";
    out << "seed = " << config.mixture.seed << "\n";
    if (config.shape.is_grid()) {
        out << "shape = grid " << config.shape.height() << "x" << config.shape.width()
            << "\n";
    } else {
        out << "shape = linear\n";
    }
    out << "layout = " << (config.mixture.is_blocks() ? "blocks" : "iid") << "\n";
    for (std::size_t i = 0; i < config.mixture.num_classes(); ++i) {
        const auto& c = config.mixture.components[i];
        out << "class " << (i + 1) << " mean=" << format_double(c.mean)
            << " var=" << format_double(c.variance)
            << " weight=" << format_double(c.weight) << "\n";
    }
    if (config.mixture.is_blocks()) {
        out << "blocks =";
        for (const auto& run : std::get<BlocksLayout>(config.mixture.layout).runs) {
            out << " " << (run.class_index + 1) << ":" << run.length;
        }
        out << "\n";
    }
    return out.str();
}

namespace {

const char* class_color(std::size_t i) {
    static const char* palette[] = {"#9e9e9e", "#ffffff", "#4e79a7", "#f28e2b",
                                    "#59a14f", "#e15759", "#b07aa1", "#76b7b2"};
    return palette[i % (sizeof(palette) / sizeof(palette[0]))];
}

}  // namespace

std::string svg_signal_strip(const SampleSet& x, const ClassificationScheme& labels) {
    if (labels.size() != x.size()) throw data_error("labels must match sample count");
    const std::size_t n = x.size();
    const double width = 800.0, trace_h = 220.0, strip_h = 40.0, pad = 10.0;
    const double height = trace_h + strip_h + 3 * pad;
    const double lo = x.min_value();
    const double range = x.value_range() > 0.0 ? x.value_range() : 1.0;
    const double dx = width / static_cast<double>(n);

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width + 2 * pad
        << "\" height=\"" << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"#fcfcfc\"/>\n";
    svg << "<polyline fill=\"none\" stroke=\"#333333\" stroke-width=\"1\" points=\"";
    for (std::size_t k = 0; k < n; ++k) {
        const double px = pad + (static_cast<double>(k) + 0.5) * dx;
        const double py = pad + trace_h * (1.0 - (x[k] - lo) / range);
        svg << px << "," << py << " ";
    }
    svg << "\"/>\n";
    const double strip_y = trace_h + 2 * pad;
    for (std::size_t k = 0; k < n; ++k) {
        svg << "<rect x=\"" << pad + static_cast<double>(k) * dx << "\" y=\"" << strip_y
            << "\" width=\"" << dx + 0.5 << "\" height=\"" << strip_h << "\" fill=\""
            << class_color(static_cast<std::size_t>(labels[k])) << "\"/>\n";
    }
    svg << "<rect x=\"" << pad << "\" y=\"" << strip_y << "\" width=\"" << width
        << "\" height=\"" << strip_h
        << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    svg << "</svg>\n";
    return svg.str();
}

std::string svg_grid_pair(const SampleSet& x, const ClassificationScheme& labels) {
    if (!x.shape().is_grid()) throw data_error("grid figure requires a grid signal");
    if (labels.size() != x.size()) throw data_error("labels must match sample count");
    const std::size_t h = x.shape().height();
    const std::size_t w = x.shape().width();
    const double cell = std::max(1.0, 320.0 / static_cast<double>(std::max(h, w)));
    const double pad = 10.0;
    const double panel_w = cell * static_cast<double>(w);
    const double panel_h = cell * static_cast<double>(h);
    const double lo = x.min_value();
    const double range = x.value_range() > 0.0 ? x.value_range() : 1.0;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * panel_w + 3 * pad
        << "\" height=\"" << panel_h + 2 * pad << "\">\n";
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            const std::size_t k = r * w + c;
            const int grey =
                static_cast<int>(std::lround(255.0 * (x[k] - lo) / range));
            svg << "<rect x=\"" << pad + static_cast<double>(c) * cell << "\" y=\""
                << pad + static_cast<double>(r) * cell << "\" width=\"" << cell
                << "\" height=\"" << cell << "\" fill=\"rgb(" << grey << "," << grey << ","
                << grey << ")\"/>\n";
        }
    }
    const double right = 2 * pad + panel_w;
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            const std::size_t k = r * w + c;
            svg << "<rect x=\"" << right + static_cast<double>(c) * cell << "\" y=\""
                << pad + static_cast<double>(r) * cell << "\" width=\"" << cell
                << "\" height=\"" << cell << "\" fill=\""
                << class_color(static_cast<std::size_t>(labels[k])) << "\"/>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace classgain
