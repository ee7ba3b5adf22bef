#pragma once

#include <string>
#include <vector>

#include "tbsynth/blueprint.hpp"

namespace tbsynth::detail {

struct BusMember {
  std::string name;
  int width = 1;
  bool rand = true;
};

// How transactions address the DUT: seq_item member names for the bus address
// and data paths, and the extra members the seq_item declares for them.
struct BusView {
  bool is_bus = false;
  BusRoles roles;
  std::string write_addr;
  std::string read_addr;
  std::string wdata;
  std::string rdata;
  int addr_width = 0;
  int data_width = 0;
  std::vector<BusMember> members;  // bus-derived seq_item members (deduplicated against fields)

  bool is_member(const std::string& name) const;
  const BusMember* member(const std::string& name) const;
};

BusView make_bus_view(const Blueprint& bp);

// Where a DSL field reference lands.
struct FieldTarget {
  enum Kind { kNone, kPort, kBusMember, kRegister, kRegisterField, kOp } kind = kNone;
  std::string name;
  int width = 0;
  const RegisterDecl* reg = nullptr;
  int lsb = 0;  // for kRegisterField
};

FieldTarget resolve_field(const Blueprint& bp, const BusView& bus, const std::string& name);

// Register value with every field at its declared default.
std::uint64_t register_reset_value(const RegisterDecl& r);

std::string sv_range(int width);  // "[7:0] " or ""

}  // namespace tbsynth::detail
