#include "tsclab/sim/roadnet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tsclab::sim {

int Lane::dwell_seconds() const {
  return static_cast<int>(std::ceil(length / free_speed));
}

int Roadnet::lane_id(const std::string& id) const {
  auto it = lane_index.find(id);
  if (it == lane_index.end())
    throw std::invalid_argument("roadnet: unknown lane '" + id + "'");
  return it->second;
}

int Roadnet::intersection_id(const std::string& id) const {
  auto it = intersection_index.find(id);
  if (it == intersection_index.end())
    throw std::invalid_argument("roadnet: unknown intersection '" + id + "'");
  return it->second;
}

int Roadnet::movement_between(int from_lane, int to_lane) const {
  auto it = movement_lookup_.find((static_cast<std::int64_t>(from_lane) << 32) |
                                  static_cast<std::uint32_t>(to_lane));
  return it == movement_lookup_.end() ? -1 : it->second;
}

void Roadnet::rebuild_indexes() {
  lane_index.clear();
  intersection_index.clear();
  movement_lookup_.clear();
  for (std::size_t i = 0; i < lanes.size(); ++i)
    lane_index[lanes[i].id] = static_cast<int>(i);
  for (std::size_t i = 0; i < intersections.size(); ++i)
    intersection_index[intersections[i].id] = static_cast<int>(i);
  for (std::size_t m = 0; m < movements.size(); ++m) {
    const Movement& mv = movements[m];
    movement_lookup_[(static_cast<std::int64_t>(mv.from_lane) << 32) |
                     static_cast<std::uint32_t>(mv.to_lane)] =
        static_cast<int>(m);
  }
}

namespace {

// Compass sides in fixed order. An approach named by side S carries traffic
// that enters the intersection from S.
enum Side { N = 0, E = 1, S = 2, W = 3 };
const char* kSideName[4] = {"N", "E", "S", "W"};

// Opposite side (through target) and left-turn target side.
constexpr Side opposite(Side s) { return static_cast<Side>((s + 2) % 4); }
constexpr Side left_target(Side s) {
  // From N heading south, left goes east; from E heading west, left goes
  // south; from S heading north, left goes west; from W heading east, north.
  switch (s) {
    case N: return E;
    case E: return S;
    case S: return W;
    default: return N;
  }
}

struct NodeRef {
  bool boundary = false;
  int row = 0, col = 0;
  Side side = N;  // for boundary nodes: which side of the grid cell
  std::string name() const {
    if (boundary)
      return std::string("b") + kSideName[side] + std::to_string(row) + "x" +
             std::to_string(col);
    return "i" + std::to_string(row) + "x" + std::to_string(col);
  }
};

}  // namespace

Roadnet build_grid(int rows, int cols, const LaneParams& lane) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("build_grid: rows and cols must be >= 1");
  Roadnet net;

  auto add_lane = [&](const std::string& id) {
    Lane l;
    l.id = id;
    l.length = lane.length;
    l.free_speed = lane.free_speed;
    l.x_max = lane.x_max;
    net.lanes.push_back(std::move(l));
    return static_cast<int>(net.lanes.size() - 1);
  };

  // Directed link between two nodes carries a through-lane and a left-lane.
  struct LinkLanes {
    int through = -1, left = -1;
  };
  std::map<std::string, LinkLanes> links;
  auto link_between = [&](const NodeRef& from, const NodeRef& to) -> LinkLanes& {
    const std::string key = from.name() + "_" + to.name();
    auto it = links.find(key);
    if (it == links.end()) {
      LinkLanes ll;
      ll.through = add_lane("ln_" + key + "_T");
      ll.left = add_lane("ln_" + key + "_L");
      it = links.emplace(key, ll).first;
    }
    return it->second;
  };

  auto neighbor = [&](int r, int c, Side s) -> NodeRef {
    int nr = r, nc = c;
    switch (s) {
      case N: nr = r - 1; break;
      case S: nr = r + 1; break;
      case E: nc = c + 1; break;
      case W: nc = c - 1; break;
    }
    if (nr < 0 || nr >= rows || nc < 0 || nc >= cols)
      return NodeRef{true, r, c, s};
    return NodeRef{false, nr, nc, N};
  };

  net.intersections.resize(static_cast<std::size_t>(rows) * cols);

  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int idx = r * cols + c;
      Intersection& inter = net.intersections[idx];
      inter.id = "i" + std::to_string(r) + "x" + std::to_string(c);
      const NodeRef self{false, r, c, N};

      LinkLanes in_links[4], out_links[4];
      for (int s = 0; s < 4; ++s) {
        const Side side = static_cast<Side>(s);
        in_links[s] = link_between(neighbor(r, c, side), self);
        out_links[s] = link_between(self, neighbor(r, c, side));
        inter.in_lanes.push_back(in_links[s].through);
        inter.in_lanes.push_back(in_links[s].left);
        inter.out_lanes.push_back(out_links[s].through);
        inter.out_lanes.push_back(out_links[s].left);
      }

      // Movements: through-lane feeds the through movement toward the
      // opposite side's through-lane; left-lane feeds the left movement
      // toward the left-target side's left-lane. Right turns omitted.
      int through_mv[4], left_mv[4];
      for (int s = 0; s < 4; ++s) {
        const Side side = static_cast<Side>(s);
        Movement th{in_links[s].through,
                    out_links[opposite(side)].through, idx};
        Movement lt{in_links[s].left, out_links[left_target(side)].left, idx};
        through_mv[s] = static_cast<int>(net.movements.size());
        net.movements.push_back(th);
        left_mv[s] = static_cast<int>(net.movements.size());
        net.movements.push_back(lt);
        inter.movements.push_back(through_mv[s]);
        inter.movements.push_back(left_mv[s]);
      }

      inter.phases[0] = {through_mv[N], through_mv[S]};  // NS-through
      inter.phases[1] = {through_mv[E], through_mv[W]};  // EW-through
      inter.phases[2] = {left_mv[N], left_mv[S]};        // NS-left
      inter.phases[3] = {left_mv[E], left_mv[W]};        // EW-left
      inter.phases[4] = {through_mv[N], left_mv[N]};     // N through+left
      inter.phases[5] = {through_mv[S], left_mv[S]};     // S through+left
      inter.phases[6] = {through_mv[E], left_mv[E]};     // E through+left
      inter.phases[7] = {through_mv[W], left_mv[W]};     // W through+left
    }
  }

  // Observation order is fixed by lane id sort.
  for (auto& inter : net.intersections) {
    auto by_id = [&](int a, int b) { return net.lanes[a].id < net.lanes[b].id; };
    std::sort(inter.in_lanes.begin(), inter.in_lanes.end(), by_id);
    std::sort(inter.out_lanes.begin(), inter.out_lanes.end(), by_id);
  }

  net.internal_links = rows * (cols - 1) + cols * (rows - 1);
  net.rebuild_indexes();
  return net;
}

}  // namespace tsclab::sim
