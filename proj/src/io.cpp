#include "parastab/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace parastab {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i)
            out += ',';
        out += header[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i)
                out += ',';
            out += format_double(row[i]);
        }
        out += '\n';
    }
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw NumericError("cannot open for writing: " + path);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw NumericError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string kv_serialize(const std::vector<std::pair<std::string, std::string>>& items) {
    std::string out;
    for (const auto& [k, v] : items)
        out += k + " = " + v + "\n";
    return out;
}

std::map<std::string, std::string> kv_parse(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream ss(text);
    std::string line;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(ss, line)) {
        const auto pos = line.find('=');
        if (pos == std::string::npos)
            continue;
        const std::string key = trim(line.substr(0, pos));
        if (!key.empty())
            out[key] = trim(line.substr(pos + 1));
    }
    return out;
}

std::string trajectory_csv(const TrajectorySolution& sol, double alpha, double xi) {
    const auto& traj = sol.trajectory;
    const int m = traj.states.empty() ? 0 : traj.states.front().size();
    std::vector<std::string> header{"t"};
    for (int c = 0; c < m; ++c) {
        header.push_back("h0_" + std::to_string(c));
        header.push_back("halpha_" + std::to_string(c));
        header.push_back("hxi_" + std::to_string(c));
    }
    header.push_back("f_norm");
    header.push_back("margin");

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        std::vector<double> row{traj.times[i]};
        for (int c = 0; c < m; ++c) {
            const auto& f = traj.states[i].comp[c];
            row.push_back(sobolev_norm(f, 0.0));
            row.push_back(sobolev_norm(f, 2.0 * alpha));
            row.push_back(sobolev_norm(f, 2.0 * xi));
        }
        row.push_back(i < sol.monitors.size() ? sol.monitors[i].f_norm : 0.0);
        row.push_back(i < sol.monitors.size() ? sol.monitors[i].margin : 0.0);
        rows.push_back(std::move(row));
    }
    return csv_table(header, rows);
}

namespace {

void put_u32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& s, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& s, double d) { put_u64(s, std::bit_cast<std::uint64_t>(d)); }

std::uint64_t get_u64(const std::string& s, std::size_t& pos) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[pos++])) << (8 * i);
    return v;
}

double get_f64(const std::string& s, std::size_t& pos) {
    return std::bit_cast<double>(get_u64(s, pos));
}

} // namespace

void write_sidecar(const std::string& path, const WeightedTrajectory& traj) {
    traj.check_consistent();
    std::string out;
    out += "PSTB";
    put_u32(out, 1u);
    const std::uint64_t n = traj.times.size();
    const std::uint64_t m = traj.states.front().size();
    const std::uint64_t K = traj.states.front().truncation();
    put_u64(out, n);
    put_u64(out, m);
    put_u64(out, K);
    put_f64(out, traj.weight);
    for (double t : traj.times)
        put_f64(out, t);
    for (const auto& st : traj.states)
        for (const auto& c : st.comp)
            for (int k = 0; k < c.truncation(); ++k)
                put_f64(out, c.coeff[k]);
    write_file(path, out);
}

WeightedTrajectory read_sidecar(const std::string& path, const Domain1D& domain) {
    const std::string s = read_file(path);
    if (s.size() < 40 || s.compare(0, 4, "PSTB") != 0)
        throw NumericError("read_sidecar: bad magic in " + path);
    std::size_t pos = 8; // magic + version
    const std::uint64_t n = get_u64(s, pos);
    const std::uint64_t m = get_u64(s, pos);
    const std::uint64_t K = get_u64(s, pos);
    if (n == 0 || m == 0 || K == 0 || m > 64 || K > (1u << 24) ||
        s.size() != 40 + 8 * (n + n * m * K))
        throw NumericError("read_sidecar: truncated or inconsistent payload in " + path);
    WeightedTrajectory traj;
    traj.weight = get_f64(s, pos);
    traj.times.resize(n);
    for (std::uint64_t i = 0; i < n; ++i)
        traj.times[i] = get_f64(s, pos);
    for (std::uint64_t i = 0; i < n; ++i) {
        SystemField st = zero_system(domain, static_cast<int>(m), static_cast<int>(K));
        for (std::uint64_t c = 0; c < m; ++c)
            for (std::uint64_t k = 0; k < K; ++k)
                st.comp[c].coeff[k] = get_f64(s, pos);
        traj.states.push_back(std::move(st));
    }
    return traj;
}

std::string svg_line_chart(
    const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>& series,
    const std::string& title, bool log_y) {
    const int W = 720, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    auto ty = [log_y](double y) { return log_y ? std::log10(std::max(y, 1e-300)) : y; };
    for (const auto& [name, pts] : series)
        for (const auto& [x, y] : pts) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, ty(y));
            ymax = std::max(ymax, ty(y));
        }
    if (!(xmax > xmin)) {
        xmax = xmin + 1;
    }
    if (!(ymax > ymin)) {
        ymax = ymin + 1;
    }
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (ty(y) - ymin) / (ymax - ymin) * (H - mt - mb); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\""
        << " font-size=\"15\">" << title << "</text>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
        << H - mb << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 5.0;
        const double yv = ymin + (ymax - ymin) * i / 5.0;
        svg << "<text x=\"" << px(xv) << "\" y=\"" << H - mb + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3g", xv);
        svg << buf << "</text>\n";
        svg << "<text x=\"" << ml - 8 << "\" y=\"" << H - mb - (H - mt - mb) * i / 5.0 + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">";
        std::snprintf(buf, sizeof(buf), "%.3g", log_y ? std::pow(10.0, yv) : yv);
        svg << buf << "</text>\n";
    }
    int ci = 0;
    for (const auto& [name, pts] : series) {
        svg << "<polyline fill=\"none\" stroke=\"" << colors[ci % 5] << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : pts)
            svg << px(x) << "," << py(y) << " ";
        svg << "\"/>\n";
        svg << "<text x=\"" << W - mr - 8 << "\" y=\"" << mt + 16 + 16 * ci
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
            << colors[ci % 5] << "\">" << name << "</text>\n";
        ++ci;
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace parastab
