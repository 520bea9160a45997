#pragma once

namespace ocfk {

extern const int kMcEdgeTable[256];
extern const int kMcTriTable[256][16];

}  // namespace ocfk
