#include "burgers/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "burgers/error.hpp"
#include "json.hpp"

namespace burgers {

namespace {

using nlohmann::json;

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  auto p = stem;
  p += suffix;
  return p;
}

void write_le(std::ostream& out, std::span<const double> values) {
  for (double v : values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
    out.write(reinterpret_cast<const char*>(bytes), 8);
  }
}

std::vector<double> read_le(std::istream& in, std::size_t count) {
  std::vector<double> values(count);
  for (auto& v : values) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw InvalidInput("binary blob is truncated");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    v = std::bit_cast<double>(bits);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw InvalidInput("binary blob has trailing bytes");
  return values;
}

void write_blob(const std::filesystem::path& stem, json header,
                const std::vector<std::span<const double>>& chunks) {
  std::size_t count = 0;
  for (const auto& c : chunks) count += c.size();
  header["format"] = "burgers-field";
  header["version"] = 1;
  header["dtype"] = "float64";
  header["endianness"] = "little";
  header["layout"] = "slice-major, component-major, row-major nodes (axis 0 slowest)";
  header["value_count"] = count;
  header["blob"] = with_suffix(stem, ".bin").filename().string();

  std::ofstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw InvalidInput("cannot open " + with_suffix(stem, ".bin").string());
  for (const auto& c : chunks) write_le(bin, c);
  std::ofstream js(with_suffix(stem, ".json"));
  if (!js) throw InvalidInput("cannot open " + with_suffix(stem, ".json").string());
  js << header.dump(2) << '\n';
}

struct Blob {
  json header;
  std::vector<double> values;
};

Blob read_blob(const std::filesystem::path& stem) {
  std::ifstream js(with_suffix(stem, ".json"));
  if (!js) throw InvalidInput("cannot open " + with_suffix(stem, ".json").string());
  Blob blob;
  try {
    blob.header = json::parse(js);
    if (blob.header.at("format") != "burgers-field") throw InvalidInput("not a burgers-field header");
    std::ifstream bin(stem.parent_path() / blob.header.at("blob").get<std::string>(), std::ios::binary);
    if (!bin) throw InvalidInput("cannot open blob for " + stem.string());
    blob.values = read_le(bin, blob.header.at("value_count").get<std::size_t>());
  } catch (const json::exception& e) {
    throw InvalidInput("malformed field header " + with_suffix(stem, ".json").string() + ": " + e.what());
  }
  return blob;
}

void write_snapshot_rows(std::ostream& out, const PeriodicField& field, const std::string& prefix) {
  const auto& grid = field.grid();
  std::array<double, kMaxDim> theta{};
  for (std::size_t node = 0; node < field.node_count(); ++node) {
    const auto idx = grid.node_index(node);
    grid.node_point(node, theta);
    out << prefix;
    for (int a = 0; a < grid.dim(); ++a) out << idx[a] << ',';
    for (int a = 0; a < grid.dim(); ++a) out << theta[a] << ',';
    for (int c = 0; c < field.components(); ++c) {
      out << field.at(c, node) << (c + 1 == field.components() ? '\n' : ',');
    }
  }
}

std::string snapshot_header(const PeriodicField& field) {
  std::ostringstream h;
  for (int a = 0; a < field.grid().dim(); ++a) h << 'i' << a << ',';
  for (int a = 0; a < field.grid().dim(); ++a) h << "theta" << a << ',';
  for (int c = 0; c < field.components(); ++c) h << 'c' << c << (c + 1 == field.components() ? "" : ",");
  return h.str();
}

}  // namespace

void write_field_csv(std::ostream& out, const PeriodicField& field) {
  out << std::setprecision(17);
  out << snapshot_header(field) << '\n';
  write_snapshot_rows(out, field, "");
}

void write_field_csv(const std::filesystem::path& path, const PeriodicField& field) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open " + path.string());
  write_field_csv(out, field);
}

void write_spacetime_csv(const std::filesystem::path& path, const SpaceTimeField& field) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open " + path.string());
  out << std::setprecision(17);
  out << "time_index,time," << snapshot_header(field.slice(0)) << '\n';
  for (std::size_t j = 0; j < field.slice_count(); ++j) {
    std::ostringstream prefix;
    prefix << std::setprecision(17) << j << ',' << field.times()[j] << ',';
    write_snapshot_rows(out, field.slice(j), prefix.str());
  }
}

PeriodicField read_field_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  int dim = 0, components = 0;
  {
    std::istringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ',')) {
      if (col.rfind("theta", 0) == 0) continue;
      if (col.size() > 1 && col[0] == 'i') ++dim;
      if (col.size() > 1 && col[0] == 'c') ++components;
    }
  }
  if (dim < 1 || components < 1) throw InvalidInput(path.string() + ": unrecognized CSV header");
  std::vector<std::array<int, kMaxDim>> indices;
  std::vector<std::vector<double>> rows;
  int max_index = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != 2 * dim + components) {
      throw InvalidInput(path.string() + ": row has wrong column count");
    }
    std::array<int, kMaxDim> idx{};
    std::vector<double> vals(components);
    try {
      for (int a = 0; a < dim; ++a) {
        idx[a] = std::stoi(cells[a]);
        if (idx[a] < 0) throw std::out_of_range("negative index");
        max_index = std::max(max_index, idx[a]);
      }
      for (int c = 0; c < components; ++c) vals[c] = std::stod(cells[2 * dim + c]);
    } catch (const std::logic_error&) {
      throw InvalidInput(path.string() + ": unreadable entry in row '" + line + "'");
    }
    indices.push_back(idx);
    rows.push_back(std::move(vals));
  }
  const GridSpec grid(dim, max_index + 1);
  if (rows.size() != grid.node_count()) throw InvalidInput(path.string() + ": incomplete grid");
  PeriodicField field(grid, components);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto node = grid.flat_index(std::span<const int>(indices[r].data(), dim));
    for (int c = 0; c < components; ++c) field.at(c, node) = rows[r][c];
  }
  return field;
}

void write_field_binary(const std::filesystem::path& stem, const PeriodicField& field) {
  json header{{"kind", "snapshot"},
              {"dim", field.grid().dim()},
              {"points_per_axis", field.grid().points_per_axis()},
              {"components", field.components()}};
  write_blob(stem, std::move(header), {field.values()});
}

void write_spacetime_binary(const std::filesystem::path& stem, const SpaceTimeField& field) {
  json header{{"kind", "spacetime"},
              {"dim", field.grid().dim()},
              {"points_per_axis", field.grid().points_per_axis()},
              {"components", field.components()},
              {"times", field.times()}};
  std::vector<std::span<const double>> chunks;
  for (const auto& s : field.slices()) chunks.push_back(s.values());
  write_blob(stem, std::move(header), chunks);
}

PeriodicField read_field_binary(const std::filesystem::path& stem) {
  auto blob = read_blob(stem);
  const auto& h = blob.header;
  if (h.value("kind", "") != "snapshot") throw InvalidInput(stem.string() + " is not a snapshot");
  const GridSpec grid(h.at("dim").get<int>(), h.at("points_per_axis").get<int>());
  return PeriodicField(grid, h.at("components").get<int>(), std::move(blob.values));
}

SpaceTimeField read_spacetime_binary(const std::filesystem::path& stem) {
  auto blob = read_blob(stem);
  const auto& h = blob.header;
  if (h.value("kind", "") != "spacetime") throw InvalidInput(stem.string() + " is not a space-time field");
  const GridSpec grid(h.at("dim").get<int>(), h.at("points_per_axis").get<int>());
  const int components = h.at("components").get<int>();
  auto times = h.at("times").get<std::vector<double>>();
  const std::size_t per = grid.node_count() * components;
  if (blob.values.size() != per * times.size()) throw InvalidInput(stem.string() + ": blob size mismatch");
  std::vector<PeriodicField> slices;
  for (std::size_t j = 0; j < times.size(); ++j) {
    slices.emplace_back(grid, components,
                        std::vector<double>(blob.values.begin() + j * per, blob.values.begin() + (j + 1) * per));
  }
  return SpaceTimeField(std::move(times), std::move(slices));
}

}  // namespace burgers
