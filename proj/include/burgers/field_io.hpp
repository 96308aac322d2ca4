#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "burgers/torus_field.hpp"

namespace burgers {

/// CSV snapshot: columns i0..i{n-1}, theta0..theta{n-1}, c0..c{k-1}.
void write_field_csv(std::ostream& out, const PeriodicField& field);
void write_field_csv(const std::filesystem::path& path, const PeriodicField& field);
/// Space-time CSV: the snapshot columns prefixed by time_index, time.
void write_spacetime_csv(const std::filesystem::path& path, const SpaceTimeField& field);
/// Reads a snapshot written by write_field_csv (values parsed at 17 digits).
PeriodicField read_field_csv(const std::filesystem::path& path);

/// Exact snapshot: `<stem>.json` header plus `<stem>.bin` little-endian
/// float64 blob. Slices are stored one after another, each component-major.
void write_field_binary(const std::filesystem::path& stem, const PeriodicField& field);
void write_spacetime_binary(const std::filesystem::path& stem, const SpaceTimeField& field);
PeriodicField read_field_binary(const std::filesystem::path& stem);
SpaceTimeField read_spacetime_binary(const std::filesystem::path& stem);

}  // namespace burgers
