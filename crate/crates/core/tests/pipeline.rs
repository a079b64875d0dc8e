// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use hsbm::hypergraph::{sample_hsbm, sample_with_partition};
use hsbm::io::{read_hypergraph, read_partition, write_hypergraph, write_partition};
use hsbm::partition::compare_partitions;
use hsbm::recovery::{counting_recover, recover_with, RecoverOptions};
use hsbm::{HsbmParams, Partition};

#[test]
fn file_round_trip_then_recover() {
    let params = HsbmParams::new(60, 3, 3, 0.8, 0.05, 11).unwrap();
    let (h, truth) = sample_hsbm(&params).unwrap();
    let mut hbuf = Vec::new();
    write_hypergraph(&h, &mut hbuf).unwrap();
    let mut pbuf = Vec::new();
    write_partition(&truth, &mut pbuf).unwrap();

    let h2 = read_hypergraph(&hbuf[..]).unwrap();
    let t2 = read_partition(&pbuf[..]).unwrap();
    assert_eq!(h2.edges().collect::<Vec<_>>(), h.edges().collect::<Vec<_>>());
    assert_eq!(t2, truth);

    let opts = RecoverOptions {
        truth: Some(&t2),
        ..Default::default()
    };
    let res = recover_with(&h2, 3, 20, &opts).unwrap();
    assert_eq!(res.exact, Some(true));
    assert_eq!(res.traces.len(), 3);
    assert!(
        compare_partitions(&counting_recover(&h2, 20).unwrap(), &t2)
            .unwrap()
            .exact
    );
}

#[test]
fn recovery_does_not_depend_on_vertex_layout() {
    // interleaved clusters rule out any help from index-order tie breaking
    let params = HsbmParams::new(60, 3, 3, 0.7, 0.05, 5).unwrap();
    for seed in 0..5 {
        let truth = Partition::shuffled(3, 20, seed);
        let h = sample_with_partition(&params.with_seed(seed), &truth).unwrap();
        let opts = RecoverOptions {
            truth: Some(&truth),
            ..Default::default()
        };
        assert_eq!(recover_with(&h, 3, 20, &opts).unwrap().exact, Some(true), "seed {seed}");
    }
}

#[test]
fn common_random_numbers_nest_edge_sets() {
    let strong = HsbmParams::new(24, 2, 3, 0.8, 0.2, 4).unwrap();
    let weak = strong.with_pq(0.5, 0.1);
    let (hs, _) = sample_hsbm(&strong).unwrap();
    let (hw, _) = sample_hsbm(&weak).unwrap();
    assert!(hw.edge_count() < hs.edge_count());
    for e in hw.edges() {
        let e: Vec<usize> = e.iter().map(|&v| v as usize).collect();
        assert!(hs.contains_edge(&e));
    }
}

#[test]
fn no_signal_recovers_nothing() {
    let params = HsbmParams::new(30, 2, 3, 0.3, 0.3, 0).unwrap();
    let exact = (0..10)
        .filter(|&seed| {
            let (h, truth) = sample_hsbm(&params.with_seed(seed)).unwrap();
            let opts = RecoverOptions {
                truth: Some(&truth),
                ..Default::default()
            };
            recover_with(&h, 2, 15, &opts).unwrap().exact == Some(true)
        })
        .count();
    assert_eq!(exact, 0);
}
