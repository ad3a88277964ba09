// CSV ingestion and export for time-series records.
//
// Format: a header row `time_s,<name>[,<name>...]` followed by numeric rows.
// A channel header cell is either `name` or `name[unit]`. The time column
// must be strictly increasing and uniformly spaced within 1e-6 s jitter; the
// sample rate is inferred from it. Values are written with shortest
// round-trip formatting, so export followed by ingest reproduces every
// sample bit-identically.
#pragma once

#include <filesystem>

#include "ksid/dataset.hpp"

namespace ksid {

// Throws DataError with row/column diagnostics on malformed input: NaN or
// missing cells, duplicate headers, non-uniform sampling, empty files.
// Channel roles are not encoded in CSV; ingested channels default to Input.
TimeSeriesDataset ingest_csv(const std::filesystem::path& path);

void export_csv(const TimeSeriesDataset& dataset,
                const std::filesystem::path& path);

}  // namespace ksid
