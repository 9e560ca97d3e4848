#pragma once

namespace sdfilter {

/// Sets the number of worker threads used by per-element loops.
/// 0 selects every available core. Results do not depend on this value:
/// parallel loops only write disjoint outputs and all reductions run in a
/// fixed order.
void set_thread_count(int threads);
int thread_count();

}  // namespace sdfilter
