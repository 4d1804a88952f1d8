#include "cascadelab/cli/output.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "cascadelab/error.hpp"

namespace cascadelab::cli {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(const std::vector<std::optional<double>>& values) {
    if (values.size() != header_.size()) throw ConfigError("CSV row width does not match the header");
    rows_.push_back(values);
}

void CsvTable::write(std::ostream& out) const {
    for (std::size_t i = 0; i < header_.size(); ++i) out << (i ? "," : "") << header_[i];
    out << '\n';
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            if (row[i]) out << format_number(*row[i]);
        }
        out << '\n';
    }
}

void CsvTable::save(const std::filesystem::path& path) const {
    std::ostringstream ss;
    write(ss);
    save_text(path, ss.str());
}

void save_text(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw IoError("SHA-256 computation failed");
    std::ostringstream ss;
    for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return ss.str();
}

namespace {

constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Frame {
    double x0, x1, y0, y1;
    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

std::string fmt(double v) {
    std::ostringstream ss;
    ss << std::setprecision(4) << v;
    return ss.str();
}

void frame_svg(std::ostringstream& s, const Frame& f, const std::string& title, const std::string& xl,
               const std::string& yl) {
    const double r = kWidth - kRight, b = kHeight - kBottom;
    s << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << r - kLeft << "\" height=\"" << b - kTop
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    s << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
      << "</text>\n";
    s << "<text x=\"" << (kLeft + r) / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(xl) << "</text>\n";
    s << "<text x=\"18\" y=\"" << (kTop + b) / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
      << (kTop + b) / 2 << ")\">" << escape(yl) << "</text>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0, yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
        s << "<text x=\"" << f.px(xv) << "\" y=\"" << b + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
          << fmt(xv) << "</text>\n";
        s << "<text x=\"" << kLeft - 6 << "\" y=\"" << f.py(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
          << fmt(yv) << "</text>\n";
    }
}

void polyline(std::ostringstream& s, const Frame& f, const Series& series, const char* color) {
    // Split at non-finite values.
    std::ostringstream pts;
    auto flush = [&] {
        if (!pts.str().empty())
            s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"" << pts.str()
              << "\"/>\n";
        pts.str("");
    };
    for (std::size_t i = 0; i < series.x.size() && i < series.y.size(); ++i) {
        if (!std::isfinite(series.x[i]) || !std::isfinite(series.y[i])) {
            flush();
            continue;
        }
        pts << fmt(f.px(series.x[i])) << ',' << fmt(f.py(series.y[i])) << ' ';
    }
    flush();
}

void legend(std::ostringstream& s, const std::vector<Series>& series, std::size_t color_offset = 0) {
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double y = kTop + 14 + 18.0 * static_cast<double>(i);
        const double x = kWidth - kRight + 10;
        s << "<line x1=\"" << x << "\" y1=\"" << y << "\" x2=\"" << x + 20 << "\" y2=\"" << y << "\" stroke=\""
          << kPalette[(i + color_offset) % 7] << "\" stroke-width=\"2\"/>\n";
        s << "<text x=\"" << x + 26 << "\" y=\"" << y + 4 << "\" font-size=\"11\">" << escape(series[i].name)
          << "</text>\n";
    }
}

std::string open_svg() {
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    return s.str();
}

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (double v : s.x)
            if (std::isfinite(v)) x0 = std::min(x0, v), x1 = std::max(x1, v);
        for (double v : s.y)
            if (std::isfinite(v)) y0 = std::min(y0, v), y1 = std::max(y1, v);
    }
    if (!(x1 > x0)) x0 = std::isfinite(x0) ? x0 - 1 : 0, x1 = x0 + 2;
    y0 = std::min(y0, 0.0);
    if (!(y1 > y0)) y1 = y0 + 1;
    const Frame f{x0, x1, y0, y1};
    std::ostringstream s;
    s << open_svg();
    frame_svg(s, f, title, x_label, y_label);
    for (std::size_t i = 0; i < series.size(); ++i) polyline(s, f, series[i], kPalette[i % 7]);
    legend(s, series);
    s << "</svg>\n";
    return s.str();
}

std::string heatmap_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                        const Heatmap& map, const std::vector<Series>& overlays) {
    auto edges = [](const std::vector<double>& c) {
        if (c.size() == 1) return std::pair{c[0] - 0.5, c[0] + 0.5};
        const double h = (c.back() - c.front()) / static_cast<double>(c.size() - 1);
        return std::pair{c.front() - h / 2, c.back() + h / 2};
    };
    const auto [x0, x1] = edges(map.x);
    const auto [y0, y1] = edges(map.y);
    const Frame f{x0, x1, y0, y1};
    std::ostringstream s;
    s << open_svg();
    s << "<defs><pattern id=\"masked\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\">"
         "<path d=\"M0,6 L6,0\" stroke=\"#999\" stroke-width=\"1\"/></pattern></defs>\n";
    const double cw = (f.px(x1) - f.px(x0)) / static_cast<double>(map.x.size());
    const double ch = (f.py(y0) - f.py(y1)) / static_cast<double>(map.y.size());
    for (std::size_t r = 0; r < map.y.size(); ++r)
        for (std::size_t c = 0; c < map.x.size(); ++c) {
            const double px = f.px(x0) + cw * static_cast<double>(c);
            const double py = f.py(y0) - ch * static_cast<double>(r + 1);
            std::string fill = "url(#masked)";
            if (const auto& v = map.values[r][c]; v && std::isfinite(*v)) {
                const int g = static_cast<int>(std::lround(255.0 * (1.0 - std::clamp(*v, 0.0, 1.0))));
                std::ostringstream col;
                col << "rgb(" << g << ',' << g << ',' << g << ')';
                fill = col.str();
            }
            s << "<rect x=\"" << fmt(px) << "\" y=\"" << fmt(py) << "\" width=\"" << fmt(cw + 0.3) << "\" height=\""
              << fmt(ch + 0.3) << "\" fill=\"" << fill << "\"/>\n";
        }
    frame_svg(s, f, title, x_label, y_label);
    for (std::size_t i = 0; i < overlays.size(); ++i) polyline(s, f, overlays[i], kPalette[(i + 1) % 7]);
    legend(s, overlays, 1);
    s << "</svg>\n";
    return s.str();
}

}  // namespace cascadelab::cli
