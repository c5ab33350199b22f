#pragma once

#include <string>
#include <vector>

#include "maple/sim.hpp"

namespace maple {

// Names accepted by make_task.
const std::vector<std::string>& task_names();

// Builds one of the registered tabletop tasks:
//   lift      raise a cube above a height threshold
//   stack     place the small cube on the large one
//   pnp       carry the can into the bin
//   pnp_bread carry the bread box into its bin
//   cleanup   spam can into the bin and jello box pushed to the corner
//   peg       insert the peg into the hole block
// Throws std::invalid_argument for unknown names.
TaskDef make_task(const std::string& name);

}  // namespace maple
