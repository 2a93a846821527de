#include "kinoplan/occupancy_grid.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace kinoplan {

namespace {

[[noreturn]] void load_error(const std::string& path, int line, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

OccupancyGrid load_ascii(const std::string& path, std::istream& in) {
  int width = 0, height = 0;
  double resolution = 0.0;
  std::string line;
  int line_no = 0;

  auto expect_header = [&](const char* key, auto& value) {
    if (!std::getline(in, line)) load_error(path, line_no + 1, "missing header line");
    ++line_no;
    std::istringstream ls(line);
    std::string k;
    if (!(ls >> k >> value) || k != key)
      load_error(path, line_no, std::string("expected '") + key + " <value>'");
  };

  expect_header("width", width);
  expect_header("height", height);
  expect_header("resolution", resolution);
  if (width <= 0 || height <= 0) load_error(path, line_no, "non-positive dimensions");
  if (!(resolution > 0.0)) load_error(path, line_no, "non-positive resolution");

  std::vector<uint8_t> cells(static_cast<size_t>(width) * height, 0);
  for (int row = 0; row < height; ++row) {
    if (!std::getline(in, line)) load_error(path, line_no + 1, "missing map row");
    ++line_no;
    if (static_cast<int>(line.size()) != width)
      load_error(path, line_no,
                 "row has " + std::to_string(line.size()) + " columns, header says " +
                     std::to_string(width));
    const int iy = height - 1 - row;  // first row in the file is the top of the map
    for (int ix = 0; ix < width; ++ix) {
      const char c = line[static_cast<size_t>(ix)];
      if (c == '#') {
        cells[static_cast<size_t>(iy) * width + ix] = 1;
      } else if (c != '.') {
        load_error(path, line_no,
                   std::string("unknown cell symbol '") + c + "' at column " +
                       std::to_string(ix + 1));
      }
    }
  }
  return OccupancyGrid(width, height, resolution, std::move(cells));
}

OccupancyGrid load_pgm(const std::string& path, std::istream& in) {
  auto next_token = [&](const char* what) {
    std::string tok;
    while (true) {
      int c = in.peek();
      if (c == '#') {  // comment to end of line
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(c)) {
        in.get();
        continue;
      }
      break;
    }
    if (!(in >> tok)) load_error(path, 0, std::string("missing PGM ") + what);
    return tok;
  };

  if (next_token("magic") != "P5") load_error(path, 1, "not a P5 PGM");
  const int width = std::stoi(next_token("width"));
  const int height = std::stoi(next_token("height"));
  const int maxval = std::stoi(next_token("maxval"));
  if (width <= 0 || height <= 0) load_error(path, 0, "non-positive PGM dimensions");
  if (maxval <= 0 || maxval > 255) load_error(path, 0, "unsupported PGM maxval");
  in.get();  // single whitespace before pixel data

  std::vector<char> pixels(static_cast<size_t>(width) * height);
  in.read(pixels.data(), static_cast<std::streamsize>(pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(pixels.size()))
    load_error(path, 0, "truncated PGM pixel data");

  std::ifstream meta(path + ".meta");
  if (!meta) load_error(path + ".meta", 0, "missing resolution sidecar");
  std::string key;
  double resolution = 0.0;
  if (!(meta >> key >> resolution) || key != "resolution" || !(resolution > 0.0))
    load_error(path + ".meta", 1, "expected 'resolution <meters>'");

  std::vector<uint8_t> cells(static_cast<size_t>(width) * height, 0);
  for (int row = 0; row < height; ++row) {
    const int iy = height - 1 - row;
    for (int ix = 0; ix < width; ++ix) {
      const auto v = static_cast<uint8_t>(pixels[static_cast<size_t>(row) * width + ix]);
      cells[static_cast<size_t>(iy) * width + ix] = v <= 127 ? 1 : 0;
    }
  }
  return OccupancyGrid(width, height, resolution, std::move(cells));
}

}  // namespace

OccupancyGrid::OccupancyGrid(int width_cells, int height_cells, double resolution,
                             std::vector<uint8_t> cells)
    : width_(width_cells), height_(height_cells), resolution_(resolution),
      cells_(std::move(cells)) {
  if (width_ <= 0 || height_ <= 0) throw std::invalid_argument("grid dimensions must be positive");
  if (!(resolution_ > 0.0)) throw std::invalid_argument("grid resolution must be positive");
  if (cells_.size() != static_cast<size_t>(width_) * height_)
    throw std::invalid_argument("grid cell count does not match dimensions");
}

size_t OccupancyGrid::occupied_count() const {
  return static_cast<size_t>(std::count_if(cells_.begin(), cells_.end(),
                                           [](uint8_t c) { return c != 0; }));
}

size_t OccupancyGrid::free_count() const { return cells_.size() - occupied_count(); }

OccupancyGrid load_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open map file");
  char magic[2] = {0, 0};
  in.read(magic, 2);
  in.seekg(0);
  if (magic[0] == 'P' && magic[1] == '5') return load_pgm(path, in);
  return load_ascii(path, in);
}

bool point_free(const OccupancyGrid& grid, const Vec2& p, double robot_radius) {
  const double r = std::max(robot_radius, 0.0);
  if (p.x - r < 0.0 || p.y - r < 0.0 || p.x + r > grid.width_m() || p.y + r > grid.height_m())
    return false;

  const double res = grid.resolution();
  const int ix0 = grid.cell_x(p.x - r);
  const int ix1 = grid.cell_x(p.x + r);
  const int iy0 = grid.cell_y(p.y - r);
  const int iy1 = grid.cell_y(p.y + r);
  for (int iy = iy0; iy <= iy1; ++iy) {
    for (int ix = ix0; ix <= ix1; ++ix) {
      if (!grid.occupied(ix, iy)) continue;
      // Distance from p to the cell rectangle.
      const double dx = std::max({ix * res - p.x, 0.0, p.x - (ix + 1) * res});
      const double dy = std::max({iy * res - p.y, 0.0, p.y - (iy + 1) * res});
      if (dx * dx + dy * dy <= r * r) return false;
    }
  }
  return true;
}

}  // namespace kinoplan
