#pragma once

#include <cstddef>
#include <functional>

namespace coreset {

// Fixed-size block decomposition: rows [0, n) are cut into blocks of
// `block` rows and each block is handed to `fn(block_index, begin, end)`.
// Blocks may run on up to `threads` workers, but the decomposition itself
// never depends on the thread count, so any per-block partial results a
// caller accumulates can be merged in block order for results that are
// byte-identical whether threads is 1 or 16.
void parallel_blocks(std::size_t n, std::size_t block, unsigned threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

// Number of blocks parallel_blocks will produce for a given n and block size.
std::size_t block_count(std::size_t n, std::size_t block);

}  // namespace coreset
