#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "tdc/geometry.hpp"

namespace tdc {

// One point per line, whitespace- or comma-separated coordinates, '#' comments.
PointSet read_points(std::istream& in);
PointSet read_points_file(const std::string& path);
void write_points(std::ostream& out, const PointSet& pts);
void write_points_file(const std::string& path, const PointSet& pts);

// One simplex per line, sorted vertex indices separated by spaces.
std::vector<Simplex> read_simplices(std::istream& in);
std::vector<Simplex> read_simplices_file(const std::string& path);
void write_simplices(std::ostream& out, const std::set<Simplex>& simplices);
void write_simplices_file(const std::string& path, const std::set<Simplex>& simplices);

// Triangles of a surface in R^3 as an OFF mesh.
void write_off(std::ostream& out, const PointSet& pts, const std::set<Simplex>& triangles);
void write_off_file(const std::string& path, const PointSet& pts, const std::set<Simplex>& triangles);

std::string format_double(double v);

} // namespace tdc
