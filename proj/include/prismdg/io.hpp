#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "prismdg/layout.hpp"
#include "prismdg/model.hpp"

namespace prismdg {

// Snapshot: one ASCII line
//   PRISMDG-SNAP 1 <field> <components> <columns> <layers> <time>
// followed by the little-endian IEEE-754 payload in FieldSoA order. When
// columns differ in layer count, <layers> is "mixed" and a second ASCII
// line lists the per-column counts. 2D nodal fields use layers = 0 and
// store 3 values per column and component.
struct Snapshot {
  std::string field;
  int components = 1;
  std::vector<int> layers;  // per column; empty for 2D fields
  int columns = 0;
  double time = 0.0;
  std::vector<double> data;
};

void write_snapshot(std::ostream& out, const std::string& field, const FieldSoA<double>& f, double time);
void write_snapshot_2d(std::ostream& out, const std::string& field, const std::vector<double>& values,
                       int components, double time);
// Throws IoError on a malformed header or short payload.
Snapshot read_snapshot(std::istream& in);
FieldSoA<double> snapshot_field(const Snapshot& s);

void write_budget_header(std::ostream& out);
void write_budget_row(std::ostream& out, const BudgetRow& row);

// Shortest round-trip decimal form of a double.
std::string format_double(double x);

}  // namespace prismdg
