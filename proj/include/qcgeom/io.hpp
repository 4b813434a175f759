#pragma once

#include "qcgeom/construction.hpp"
#include "qcgeom/dimension.hpp"
#include "qcgeom/dyadic.hpp"
#include "qcgeom/gauge.hpp"
#include "qcgeom/porosity.hpp"
#include "qcgeom/qhyper.hpp"

#include "json.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace qcgeom {

using Json = nlohmann::ordered_json;

// {kind, params, t_max}. Tabulated params are [log2 t, log2 phi] pairs.
Json gauge_to_json(const GaugeFunction& g);
GaugeFunction gauge_from_json(const Json& j);

// Binary voxel file, little-endian:
//   "QCGD" | u32 version | u32 n | u32 L | f64 lo[n] | f64 hi[n] | bitmask
// The bitmask packs cells in linear order, least significant bit first.
void write_domain(const Domain& d, const std::string& path);
Domain read_domain(const std::string& path);
std::vector<std::uint8_t> encode_domain(const Domain& d);
Domain decode_domain(const std::vector<std::uint8_t>& bytes);

// level,c0,c1[,c2]
void write_cubes_csv(std::ostream& os, const std::vector<DyadicCube>& cubes);
// x0,x1[,x2]
void write_path_csv(std::ostream& os, const QhPath& path);
// point,x0,x1[,x2],j,S_j,S_j_over_j
void write_porosity_csv(std::ostream& os, const PorosityResult& r);
// j,scale,sum
void write_gauge_profile_csv(std::ostream& os, const GaugeProfile& p);

Json whitney_report_to_json(const WhitneyReport& r);
Json porosity_to_json(const PorosityResult& r);
Json gauge_profile_to_json(const GaugeProfile& p);
Json frostman_to_json(const FrostmanProfile& p);
Json growth_to_json(const GrowthReport& r);
Json conditions_to_json(const ConditionReport& r);
Json blocks_to_json(const BlockClassification& b);
// Levels, squares, gates and, when with_masses is set, the Frostman masses.
Json tree_to_json(const ConstructionTree& t, bool with_masses = true);

struct SvgOptions {
  int max_pixels = 1024;
  std::vector<DyadicCube> cubes;
  std::vector<QhPath> paths;
};

// 2D only. Cells are drawn at no more than max_pixels per side, colored by the
// largest mask value in each block.
void write_svg(std::ostream& os, const Domain& d, const SvgOptions& opt = {});

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace qcgeom
