//! Static TDD layout: which slots carry downlink and which uplink.

use serde::{Deserialize, Serialize};

use crate::config::SlotKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Downlink,
    Uplink,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Downlink => "DL",
            Direction::Uplink => "UL",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SlotLayout {
    pub kind: SlotKind,
    pub direction: Direction,
}

/// Control slots alternate DL, UL, DL, ... in pattern order. Of the `n` data
/// slots the first `⌈n/2⌉` are DL and the rest UL.
pub fn assign_tdd_slots(pattern: &[SlotKind]) -> Vec<SlotLayout> {
    let n_data = pattern.iter().filter(|k| **k == SlotKind::Data).count();
    let n_dl = n_data.div_ceil(2);
    let (mut ctrl, mut data) = (0usize, 0usize);
    pattern
        .iter()
        .map(|&kind| {
            let direction = match kind {
                SlotKind::Control => {
                    ctrl += 1;
                    if ctrl % 2 == 1 {
                        Direction::Downlink
                    } else {
                        Direction::Uplink
                    }
                }
                SlotKind::Data => {
                    data += 1;
                    if data <= n_dl {
                        Direction::Downlink
                    } else {
                        Direction::Uplink
                    }
                }
            };
            SlotLayout { kind, direction }
        })
        .collect()
}

/// Whether slot `index` transmits in a different direction than the slot
/// before it; slot 0 is compared with the last slot of the previous subframe.
pub fn direction_switch(layout: &[SlotLayout], index: usize) -> bool {
    let prev = if index == 0 { layout.len() - 1 } else { index - 1 };
    layout[prev].direction != layout[index].direction
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_tdd_pattern;
    use proptest::prelude::*;
    use Direction::*;

    fn dirs(p: &str) -> Vec<(char, Direction)> {
        let kinds = parse_tdd_pattern(p, p.len()).unwrap();
        assign_tdd_slots(&kinds)
            .iter()
            .map(|s| (s.kind.as_char(), s.direction))
            .collect()
    }

    #[test]
    fn default_pattern() {
        assert_eq!(
            dirs("ccdddddd"),
            vec![
                ('c', Downlink),
                ('c', Uplink),
                ('d', Downlink),
                ('d', Downlink),
                ('d', Downlink),
                ('d', Uplink),
                ('d', Uplink),
                ('d', Uplink),
            ]
        );
    }

    #[test]
    fn control_only_and_odd_data() {
        assert_eq!(dirs("cc"), vec![('c', Downlink), ('c', Uplink)]);
        assert_eq!(
            dirs("ccddd"),
            vec![('c', Downlink), ('c', Uplink), ('d', Downlink), ('d', Downlink), ('d', Uplink)]
        );
    }

    #[test]
    fn switch_points_of_default_pattern() {
        let layout = assign_tdd_slots(&parse_tdd_pattern("ccdddddd", 8).unwrap());
        let switches: Vec<usize> = (0..8).filter(|&i| direction_switch(&layout, i)).collect();
        assert_eq!(switches, vec![0, 1, 2, 5]);
    }

    proptest! {
        #[test]
        fn data_region_switches_at_most_once(p in "[cd]{1,24}") {
            let kinds = parse_tdd_pattern(&p, p.len()).unwrap();
            let layout = assign_tdd_slots(&kinds);
            let data: Vec<Direction> = layout.iter().filter(|s| s.kind == SlotKind::Data).map(|s| s.direction).collect();
            let dl_to_ul = data.windows(2).filter(|w| w[0] == Downlink && w[1] == Uplink).count();
            let ul_to_dl = data.windows(2).filter(|w| w[0] == Uplink && w[1] == Downlink).count();
            prop_assert!(dl_to_ul <= 1);
            prop_assert_eq!(ul_to_dl, 0);
            let dl = data.iter().filter(|d| **d == Downlink).count();
            prop_assert_eq!(dl, data.len().div_ceil(2));
        }
    }
}
