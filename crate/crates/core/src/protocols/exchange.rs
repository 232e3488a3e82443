use crate::engine::{NodeProgram, Status, Symbol};

/// Bits needed for numbers `1..=v`: `ceil(log2(v + 1))`.
pub fn exchange_width(v: usize) -> u32 {
    usize::BITS - v.leading_zeros()
}

/// Every node sends its number on all ports, most significant bit first,
/// one bit per round (`0` and `1` as symbols 1 and 2), and reads its
/// neighbours' numbers. Halts after reading the last bit.
#[derive(Clone, Debug)]
pub struct Exchange {
    number: u32,
    width: u32,
    received: Vec<u32>,
    halted: bool,
}

impl Exchange {
    pub const ALPHABET: u16 = 3;

    pub fn new(number: u32, node_count: usize, degree: usize) -> Self {
        Exchange {
            number,
            width: exchange_width(node_count),
            received: vec![0; degree],
            halted: false,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }
}

impl NodeProgram for Exchange {
    /// Neighbour number per port.
    type Output = Vec<u32>;

    fn step(&mut self, round: u64, inbox: &[Symbol], outbox: &mut [Symbol]) -> Status {
        if self.halted {
            return Status::Halted;
        }
        let width = u64::from(self.width);
        if (1..=width).contains(&round) {
            for (acc, s) in self.received.iter_mut().zip(inbox) {
                debug_assert!(matches!(s.0, 1 | 2), "one bit per round on every port");
                *acc = (*acc << 1) | u32::from(s.0 == 2);
            }
        }
        if round >= width {
            self.halted = true;
            return Status::Halted;
        }
        let bit = (self.number >> (width - 1 - round)) & 1;
        outbox.fill(Symbol(1 + bit as u16));
        Status::Running
    }

    fn output(&self) -> Vec<u32> {
        self.received.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths() {
        assert_eq!(exchange_width(1), 1);
        assert_eq!(exchange_width(3), 2);
        assert_eq!(exchange_width(4), 3);
        assert_eq!(exchange_width(7), 3);
        assert_eq!(exchange_width(8), 4);
    }

    #[test]
    fn three_sends_one_one() {
        let mut x = Exchange::new(3, 3, 1);
        let mut sent = Vec::new();
        for round in 0..2 {
            let mut out = [Symbol::EMPTY];
            let inbox = [if round == 0 { Symbol::EMPTY } else { Symbol(1) }];
            assert_eq!(x.step(round, &inbox, &mut out), Status::Running);
            sent.push(out[0]);
        }
        assert_eq!(sent, vec![Symbol(2), Symbol(2)]);
        assert_eq!(x.step(2, &[Symbol(2)], &mut [Symbol::EMPTY]), Status::Halted);
        assert_eq!(x.output(), vec![1]);
    }
}
