#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "plab/harness.hpp"

namespace plab {
namespace {

namespace fs = std::filesystem;

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fixed(double v, int digits = 2) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

bool RunReport::all_pass() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass; });
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + tmp);
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!f) throw std::runtime_error("short write to " + tmp);
    }
    fs::rename(tmp, path);
}

std::string table_csv(const Table& t) {
    std::string out;
    for (std::size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + t.columns[c];
    out += "\n";
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + num(row[c]);
        out += "\n";
    }
    return out;
}

// Plain polyline chart of every column against x_column.
std::string table_svg(const Table& t, const std::string& x_column, bool log_axes) {
    const double W = 640, H = 420, L = 70, R = 160, Tm = 30, B = 50;
    auto xi = std::find(t.columns.begin(), t.columns.end(), x_column);
    if (xi == t.columns.end()) throw std::invalid_argument("no column " + x_column);
    std::size_t xc = static_cast<std::size_t>(xi - t.columns.begin());
    auto tr = [&](double v) { return log_axes ? (v > 0 ? std::log10(v) : NAN) : v; };
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& row : t.rows)
        for (std::size_t c = 0; c < row.size(); ++c) {
            double v = tr(row[c]);
            if (!std::isfinite(v)) continue;
            if (c == xc) {
                x0 = std::min(x0, v);
                x1 = std::max(x1, v);
            } else {
                y0 = std::min(y0, v);
                y1 = std::max(y1, v);
            }
        }
    if (!(x1 > x0)) x1 = x0 + 1;
    if (!(y1 > y0)) y1 = y0 + 1;
    auto px = [&](double v) { return L + (tr(v) - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double v) { return H - B - (tr(v) - y0) / (y1 - y0) * (H - Tm - B); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(W, 0) + "\" height=\"" + fixed(H, 0) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + fixed(L) + "\" y=\"20\" font-size=\"14\" font-family=\"sans-serif\">" + t.name +
         (log_axes ? " (log10 axes)" : "") + "</text>\n";
    s += "<rect x=\"" + fixed(L) + "\" y=\"" + fixed(Tm) + "\" width=\"" + fixed(W - L - R) + "\" height=\"" +
         fixed(H - Tm - B) + "\" fill=\"none\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fixed(L) + "\" y=\"" + fixed(H - 15) + "\" font-size=\"11\" font-family=\"sans-serif\">" +
         x_column + ": " + num(x0) + " .. " + num(x1) + "</text>\n";
    s += "<text x=\"5\" y=\"" + fixed(Tm + 10) + "\" font-size=\"11\" font-family=\"sans-serif\">" + fixed(y1, 3) +
         "</text>\n";
    s += "<text x=\"5\" y=\"" + fixed(H - B) + "\" font-size=\"11\" font-family=\"sans-serif\">" + fixed(y0, 3) +
         "</text>\n";
    int k = 0;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (c == xc) continue;
        std::string pts;
        for (const auto& row : t.rows) {
            double X = px(row[xc]), Y = py(row[c]);
            if (std::isfinite(X) && std::isfinite(Y)) pts += fixed(X) + "," + fixed(Y) + " ";
        }
        const char* col = colors[k % 7];
        s += "<polyline fill=\"none\" stroke=\"" + std::string(col) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        s += "<text x=\"" + fixed(W - R + 10) + "\" y=\"" + fixed(Tm + 15 + 16 * k) + "\" font-size=\"11\" fill=\"" +
             col + "\" font-family=\"sans-serif\">" + t.columns[c] + "</text>\n";
        ++k;
    }
    s += "</svg>\n";
    return s;
}

nlohmann::json report_json(const RunReport& r) {
    using nlohmann::json;
    json j;
    j["config"] = r.config;
    j["tables"] = json::array();
    for (const auto& t : r.tables) j["tables"].push_back({{"name", t.name}, {"file", t.name + ".csv"}, {"rows", t.rows.size()}});
    j["slopes"] = json::object();
    for (const auto& [k, f] : r.slopes)
        j["slopes"][k] = {{"slope", f.slope}, {"stderr", f.stderr_slope}, {"ci95", 1.96 * f.stderr_slope},
                          {"intercept", f.intercept}, {"points", f.points}};
    j["constants"] = json::array();
    for (const auto& c : r.constants)
        j["constants"].push_back({{"name", c.name}, {"value", c.value}, {"anchor", c.anchor}, {"seeds", c.seeds}});
    j["criteria"] = json::array();
    for (const auto& c : r.criteria)
        j["criteria"].push_back({{"name", c.name}, {"pass", c.pass}, {"anchor", c.anchor}, {"detail", c.detail}});
    j["notes"] = r.notes;
    j["all_pass"] = r.all_pass();
    j["wall_clock_s"] = r.wall_clock;
    return j;
}

void write_report(const std::string& dir, const RunReport& r, bool svg) {
    fs::create_directories(dir);
    for (const auto& t : r.tables) {
        write_file_atomic(dir + "/" + t.name + ".csv", table_csv(t));
        if (svg && !t.rows.empty()) {
            bool log_axes = t.columns.front() == "t" || t.columns.front() == "eps";
            write_file_atomic(dir + "/" + t.name + ".svg", table_svg(t, t.columns.front(), log_axes));
        }
    }
    write_file_atomic(dir + "/report.json", report_json(r).dump(2) + "\n");
}

}  // namespace plab
