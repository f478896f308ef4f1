#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "sngp/config.hpp"
#include "sngp/model.hpp"

namespace sngp {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kCheckpointVersion = 1;

/// A trained run: the effective config and one model per ensemble member
/// (a single member for every other variant).
struct Checkpoint {
  RunConfig config;
  std::vector<SngpModel> members;
};

/// Text format, first line `SNGP-CHECKPOINT <version>`, then the config echo
/// and every parameter at 17 significant digits, so reading restores the
/// models bit for bit and writing is deterministic.
void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace sngp
