#pragma once

#include <string>
#include <vector>

#include "tsclab/sim/roadnet.hpp"
#include "tsclab/sim/world.hpp"

namespace tsclab::sim {

// Roadnet file, JSON, schema version "tsclab-v1": intersections[], lanes[]
// (id, length, speed, x_max), movements[], phases[].
void save_roadnet(const std::string& path, const Roadnet& net);
Roadnet load_roadnet(const std::string& path);

// Flow file, JSON, schema version "tsclab-v1": vehicles[] of
// {id, route:[lane ids], depart: int seconds}.
void save_flow(const std::string& path, const std::vector<VehicleSpec>& flow);
std::vector<VehicleSpec> load_flow(const std::string& path);

}  // namespace tsclab::sim
