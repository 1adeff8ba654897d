//! Fill-reducing orderings.

use crate::sparse::CsrMatrix;

/// METIS multilevel nested dissection of the graph of `a`, as an
/// elimination order. `None` if METIS reports an error.
pub fn metis_nested_dissection(a: &CsrMatrix) -> Option<Vec<usize>> {
    let n = a.nrows();
    let mut xadj: Vec<metis_sys::idx_t> = Vec::with_capacity(n + 1);
    let mut adjncy: Vec<metis_sys::idx_t> = Vec::with_capacity(a.nnz());
    xadj.push(0);
    for i in 0..n {
        adjncy.extend(a.row(i).filter(|&(j, _)| j != i).map(|(j, _)| j as metis_sys::idx_t));
        xadj.push(adjncy.len() as metis_sys::idx_t);
    }
    let mut nvtxs = n as metis_sys::idx_t;
    let mut perm = vec![0; n];
    let mut iperm = vec![0; n];
    // SAFETY: the arrays outlive the call and have the sizes METIS expects;
    // null vertex weights and options select the defaults.
    let status = unsafe {
        metis_sys::METIS_NodeND(
            &mut nvtxs,
            xadj.as_mut_ptr(),
            adjncy.as_mut_ptr(),
            std::ptr::null_mut(),
            std::ptr::null_mut(),
            perm.as_mut_ptr(),
            iperm.as_mut_ptr(),
        )
    };
    (status == metis_sys::rstatus_et_METIS_OK).then(|| perm.into_iter().map(|p| p as usize).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::TripletBuilder;

    fn grid(n: usize) -> CsrMatrix {
        let id = |i: usize, j: usize| i * n + j;
        let mut t = TripletBuilder::new(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                t.push(id(i, j), id(i, j), 4.0);
                if i + 1 < n {
                    t.push(id(i, j), id(i + 1, j), -1.0);
                    t.push(id(i + 1, j), id(i, j), -1.0);
                }
                if j + 1 < n {
                    t.push(id(i, j), id(i, j + 1), -1.0);
                    t.push(id(i, j + 1), id(i, j), -1.0);
                }
            }
        }
        t.build()
    }

    #[test]
    fn ordering_is_a_permutation() {
        let mut order = metis_nested_dissection(&grid(40)).unwrap();
        order.sort_unstable();
        assert_eq!(order, (0..1600).collect::<Vec<_>>());
    }
}
