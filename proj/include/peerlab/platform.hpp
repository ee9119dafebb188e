#pragma once

namespace peerlab {

/// Raises the allocator's mmap and trim thresholds so the per-step batch
/// matrices are recycled from the heap instead of being mapped and unmapped
/// on every training step. No-op outside glibc.
void tune_allocator();

}  // namespace peerlab
