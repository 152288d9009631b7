#include "coreset/parallel.hpp"

#include <atomic>
#include <mutex>
#include <thread>
#include <vector>

#include "coreset/errors.hpp"

namespace coreset {

std::size_t block_count(std::size_t n, std::size_t block) {
    if (block == 0) throw DataError("block_count: block size must be >= 1");
    return (n + block - 1) / block;
}

void parallel_blocks(std::size_t n, std::size_t block, unsigned threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    const std::size_t nblocks = block_count(n, block);
    if (nblocks == 0) return;
    if (threads <= 1 || nblocks == 1) {
        for (std::size_t b = 0; b < nblocks; ++b) {
            const std::size_t begin = b * block;
            const std::size_t end = std::min(begin + block, n);
            fn(b, begin, end);
        }
        return;
    }
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(threads, nblocks));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t b = next.fetch_add(1);
                if (b >= nblocks || failed.load()) return;
                const std::size_t begin = b * block;
                const std::size_t end = std::min(begin + block, n);
                try {
                    fn(b, begin, end);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!failed.exchange(true)) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace coreset
