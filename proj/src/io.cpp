#include "tdc/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace tdc {

namespace {

std::string strip_comment(std::string line) {
    auto h = line.find('#');
    if (h != std::string::npos) line.resize(h);
    std::replace(line.begin(), line.end(), ',', ' ');
    return line;
}

template <class F>
void with_input(const std::string& path, F f) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ParseError, "cannot read " + path);
    f(in);
}

template <class F>
void with_output(const std::string& path, F f) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
    f(out);
    if (!out) throw Error(ErrorKind::InvalidArgument, "write failed for " + path);
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

PointSet read_points(std::istream& in) {
    PointSet ps;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(strip_comment(line));
        std::vector<double> c;
        std::string tok;
        while (ls >> tok) {
            try {
                size_t pos = 0;
                c.push_back(std::stod(tok, &pos));
                if (pos != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": bad coordinate '" + tok + "'");
            }
        }
        if (c.empty()) continue;
        if (ps.dim == 0) ps.dim = static_cast<int>(c.size());
        if (static_cast<int>(c.size()) != ps.dim)
            throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": expected " + std::to_string(ps.dim) +
                                                   " coordinates");
        ps.pts.push_back(Eigen::Map<Vec>(c.data(), static_cast<Eigen::Index>(c.size())));
    }
    return ps;
}

PointSet read_points_file(const std::string& path) {
    PointSet ps;
    with_input(path, [&](std::istream& in) { ps = read_points(in); });
    return ps;
}

void write_points(std::ostream& out, const PointSet& pts) {
    for (const auto& p : pts.pts) {
        for (Eigen::Index i = 0; i < p.size(); ++i) out << (i ? " " : "") << format_double(p[i]);
        out << '\n';
    }
}

void write_points_file(const std::string& path, const PointSet& pts) {
    with_output(path, [&](std::ostream& out) { write_points(out, pts); });
}

std::vector<Simplex> read_simplices(std::istream& in) {
    std::vector<Simplex> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(strip_comment(line));
        std::vector<int> v;
        std::string tok;
        while (ls >> tok) {
            try {
                size_t pos = 0;
                int x = std::stoi(tok, &pos);
                if (pos != tok.size() || x < 0) throw std::invalid_argument(tok);
                v.push_back(x);
            } catch (const std::exception&) {
                throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": bad vertex '" + tok + "'");
            }
        }
        if (v.empty()) continue;
        Simplex s = make_simplex(v);
        if (s.size() != v.size()) throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": repeated vertex");
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Simplex> read_simplices_file(const std::string& path) {
    std::vector<Simplex> s;
    with_input(path, [&](std::istream& in) { s = read_simplices(in); });
    return s;
}

void write_simplices(std::ostream& out, const std::set<Simplex>& simplices) {
    std::vector<Simplex> v(simplices.begin(), simplices.end());
    std::stable_sort(v.begin(), v.end(), [](const Simplex& a, const Simplex& b) { return a.size() < b.size(); });
    for (const auto& s : v) {
        for (size_t i = 0; i < s.size(); ++i) out << (i ? " " : "") << s[i];
        out << '\n';
    }
}

void write_simplices_file(const std::string& path, const std::set<Simplex>& simplices) {
    with_output(path, [&](std::ostream& out) { write_simplices(out, simplices); });
}

void write_off(std::ostream& out, const PointSet& pts, const std::set<Simplex>& triangles) {
    if (pts.dim != 3) throw Error(ErrorKind::DimensionMismatch, "OFF export needs points in R^3");
    std::size_t nt = 0;
    for (const auto& t : triangles) nt += t.size() == 3;
    out << "OFF\n" << pts.size() << ' ' << nt << " 0\n";
    write_points(out, pts);
    for (const auto& t : triangles)
        if (t.size() == 3) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

void write_off_file(const std::string& path, const PointSet& pts, const std::set<Simplex>& triangles) {
    with_output(path, [&](std::ostream& out) { write_off(out, pts, triangles); });
}

} // namespace tdc
