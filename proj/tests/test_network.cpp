// Opt-in tier (-DSPARSEBENCH_NETWORK_TESTS=ON): downloads a small corpus
// matrix and checks it against its published statistics.

#include "doctest.h"
#include "sparsebench/fetch.hpp"
#include "sparsebench/mmio.hpp"

using namespace sparsebench;

TEST_CASE("shallow_water1 downloads and matches its published row") {
  const CollectionEntry* ref = find_reference("shallow_water1");
  REQUIRE(ref != nullptr);
  const MatrixSource src = resolve_source("shallow_water1");
  const CsrMatrix a = load_matrix_market(fetch_matrix(src));
  const MatrixStats st = compute_stats(a);
  CHECK(st.rows == ref->rows);
  CHECK(st.nonzeros == ref->nonzeros);
  CHECK(format_density(st.density) == ref->density);
  CHECK(format_avg(st.avg_nnz_per_row) == ref->avg_nnz_per_row);
  CHECK(st.max_nnz_per_row == ref->max_nnz_per_row);
  CHECK(st.max_nnz_per_col == ref->max_nnz_per_col);
}
