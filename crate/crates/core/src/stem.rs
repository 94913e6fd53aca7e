//! Porter suffix-stripping stemmer.
//!
//! One pass follows the original 1980 algorithm (steps 1a through 5b,
//! measure-based conditions, the same rule order and tie handling as the
//! reference implementation). [`stem`] iterates the pass to a fixpoint so the
//! result is idempotent: a handful of stacked-suffix words strip one step
//! further than single-pass Porter, but every stem is stable under
//! re-stemming. Tokens containing bytes outside `a..z`, `0..9`, `_` are
//! returned unchanged, as are words of length one or two.

/// Stem a single token.
pub fn stem(token: &str) -> String {
    if !token
        .bytes()
        .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
    {
        return token.to_string();
    }
    let mut current = token.as_bytes().to_vec();
    // Each effective pass strictly shortens the word except for the rare
    // same-length rewrites (y->i, enci->ence), none of which can recur, so a
    // small iteration cap is ample.
    for _ in 0..8 {
        if current.len() <= 2 {
            break;
        }
        let mut pass = Stemmer {
            buf: current.clone(),
        };
        pass.run();
        if pass.buf == current {
            break;
        }
        current = pass.buf;
    }
    String::from_utf8(current).expect("stemmer output is ascii")
}

struct Stemmer {
    buf: Vec<u8>,
}

impl Stemmer {
    fn run(&mut self) {
        self.step1a();
        self.step1b();
        self.step1c();
        self.step2();
        self.step3();
        self.step4();
        self.step5a();
        self.step5b();
    }

    fn is_consonant(&self, i: usize) -> bool {
        match self.buf[i] {
            b'a' | b'e' | b'i' | b'o' | b'u' => false,
            b'y' => i == 0 || !self.is_consonant(i - 1),
            _ => true,
        }
    }

    /// Measure of `buf[..end]`: the `m` in `[C](VC)^m[V]`.
    fn measure(&self, end: usize) -> usize {
        let mut m = 0;
        let mut i = 0;
        while i < end && self.is_consonant(i) {
            i += 1;
        }
        loop {
            while i < end && !self.is_consonant(i) {
                i += 1;
            }
            if i >= end {
                return m;
            }
            while i < end && self.is_consonant(i) {
                i += 1;
            }
            m += 1;
        }
    }

    fn has_vowel(&self, end: usize) -> bool {
        (0..end).any(|i| !self.is_consonant(i))
    }

    fn ends_double_consonant(&self, end: usize) -> bool {
        end >= 2 && self.buf[end - 1] == self.buf[end - 2] && self.is_consonant(end - 1)
    }

    /// `*o`: stem ends consonant-vowel-consonant and the final consonant is
    /// not w, x, or y.
    fn ends_cvc(&self, end: usize) -> bool {
        if end < 3 {
            return false;
        }
        self.is_consonant(end - 3)
            && !self.is_consonant(end - 2)
            && self.is_consonant(end - 1)
            && !matches!(self.buf[end - 1], b'w' | b'x' | b'y')
    }

    fn ends_with(&self, suffix: &[u8]) -> Option<usize> {
        if self.buf.len() >= suffix.len() && self.buf.ends_with(suffix) {
            Some(self.buf.len() - suffix.len())
        } else {
            None
        }
    }

    fn replace(&mut self, stem_len: usize, replacement: &[u8]) {
        self.buf.truncate(stem_len);
        self.buf.extend_from_slice(replacement);
    }

    /// The longest matching suffix decides the rule; if its measure condition
    /// fails, the step does nothing (reference behavior).
    fn apply_rules(&mut self, rules: &[(&[u8], &[u8])]) {
        let mut best: Option<(usize, &[u8])> = None;
        for &(suffix, replacement) in rules {
            if let Some(stem_len) = self.ends_with(suffix) {
                if best.map_or(true, |(best_len, _)| stem_len < best_len) {
                    best = Some((stem_len, replacement));
                }
            }
        }
        if let Some((stem_len, replacement)) = best {
            if self.measure(stem_len) > 0 {
                self.replace(stem_len, replacement);
            }
        }
    }

    fn step1a(&mut self) {
        if self.ends_with(b"sses").is_some() || self.ends_with(b"ies").is_some() {
            self.buf.truncate(self.buf.len() - 2);
        } else if self.ends_with(b"ss").is_none() && self.ends_with(b"s").is_some() {
            self.buf.pop();
        }
    }

    fn step1b(&mut self) {
        if let Some(stem_len) = self.ends_with(b"eed") {
            if self.measure(stem_len) > 0 {
                self.buf.pop();
            }
            return;
        }
        let mut removed = false;
        if let Some(stem_len) = self.ends_with(b"ed") {
            if self.has_vowel(stem_len) {
                self.buf.truncate(stem_len);
                removed = true;
            }
        } else if let Some(stem_len) = self.ends_with(b"ing") {
            if self.has_vowel(stem_len) {
                self.buf.truncate(stem_len);
                removed = true;
            }
        }
        if !removed {
            return;
        }
        let len = self.buf.len();
        if self.ends_with(b"at").is_some()
            || self.ends_with(b"bl").is_some()
            || self.ends_with(b"iz").is_some()
        {
            self.buf.push(b'e');
        } else if self.ends_double_consonant(len) {
            if !matches!(self.buf[len - 1], b'l' | b's' | b'z') {
                self.buf.pop();
            }
        } else if self.measure(len) == 1 && self.ends_cvc(len) {
            self.buf.push(b'e');
        }
    }

    fn step1c(&mut self) {
        if let Some(stem_len) = self.ends_with(b"y") {
            if self.has_vowel(stem_len) {
                self.buf[stem_len] = b'i';
            }
        }
    }

    fn step2(&mut self) {
        self.apply_rules(&[
            (b"ational", b"ate"),
            (b"tional", b"tion"),
            (b"enci", b"ence"),
            (b"anci", b"ance"),
            (b"izer", b"ize"),
            (b"abli", b"able"),
            (b"alli", b"al"),
            (b"entli", b"ent"),
            (b"eli", b"e"),
            (b"ousli", b"ous"),
            (b"ization", b"ize"),
            (b"ation", b"ate"),
            (b"ator", b"ate"),
            (b"alism", b"al"),
            (b"iveness", b"ive"),
            (b"fulness", b"ful"),
            (b"ousness", b"ous"),
            (b"aliti", b"al"),
            (b"iviti", b"ive"),
            (b"biliti", b"ble"),
        ]);
    }

    fn step3(&mut self) {
        self.apply_rules(&[
            (b"icate", b"ic"),
            (b"ative", b""),
            (b"alize", b"al"),
            (b"iciti", b"ic"),
            (b"ical", b"ic"),
            (b"ful", b""),
            (b"ness", b""),
        ]);
    }

    fn step4(&mut self) {
        const SUFFIXES: &[&[u8]] = &[
            b"ement", b"ance", b"ence", b"able", b"ible", b"ment", b"ent", b"ion", b"ism",
            b"ate", b"iti", b"ous", b"ive", b"ize", b"ant", b"al", b"er", b"ic", b"ou",
        ];
        let mut best: Option<usize> = None;
        for &suffix in SUFFIXES {
            if let Some(stem_len) = self.ends_with(suffix) {
                if best.map_or(true, |b| stem_len < b) {
                    best = Some(stem_len);
                }
            }
        }
        if let Some(stem_len) = best {
            let ion = self.buf.len() - stem_len == 3 && self.buf[stem_len..].starts_with(b"ion");
            let ion_ok = !ion || (stem_len > 0 && matches!(self.buf[stem_len - 1], b's' | b't'));
            if self.measure(stem_len) > 1 && ion_ok {
                self.buf.truncate(stem_len);
            }
        }
    }

    fn step5a(&mut self) {
        if let Some(stem_len) = self.ends_with(b"e") {
            let m = self.measure(stem_len);
            if m > 1 || (m == 1 && !self.ends_cvc(stem_len)) {
                self.buf.pop();
            }
        }
    }

    fn step5b(&mut self) {
        let len = self.buf.len();
        if len >= 2
            && self.buf[len - 1] == b'l'
            && self.ends_double_consonant(len)
            && self.measure(len) > 1
        {
            self.buf.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_outputs() {
        // canonical Porter outputs that are already stable under re-stemming
        for (input, expected) in [
            ("caresses", "caress"),
            ("ponies", "poni"),
            ("caress", "caress"),
            ("cats", "cat"),
            ("feed", "feed"),
            ("plastered", "plaster"),
            ("bled", "bled"),
            ("motoring", "motor"),
            ("sing", "sing"),
            ("conflated", "conflat"),
            ("troubled", "troubl"),
            ("sized", "size"),
            ("hopping", "hop"),
            ("tanned", "tan"),
            ("falling", "fall"),
            ("hissing", "hiss"),
            ("fizzed", "fizz"),
            ("failing", "fail"),
            ("filing", "file"),
            ("happy", "happi"),
            ("sky", "sky"),
            ("relational", "relat"),
            ("conditional", "condit"),
            ("rational", "ration"),
            ("valenci", "valenc"),
            ("digitizer", "digit"),
            ("operator", "oper"),
            ("feudalism", "feudal"),
            ("hopefulness", "hope"),
            ("formaliti", "formal"),
            ("sensitiviti", "sensit"),
            ("sensibiliti", "sensibl"),
            ("triplicate", "triplic"),
            ("formative", "form"),
            ("formalize", "formal"),
            ("electriciti", "electr"),
            ("electrical", "electr"),
            ("hopeful", "hope"),
            ("goodness", "good"),
            ("revival", "reviv"),
            ("allowance", "allow"),
            ("inference", "infer"),
            ("airliner", "airlin"),
            ("gyroscopic", "gyroscop"),
            ("adjustable", "adjust"),
            ("irritant", "irrit"),
            ("replacement", "replac"),
            ("adjustment", "adjust"),
            ("dependent", "depend"),
            ("adoption", "adopt"),
            ("communism", "commun"),
            ("activate", "activ"),
            ("angulariti", "angular"),
            ("homologous", "homolog"),
            ("effective", "effect"),
            ("bowdlerize", "bowdler"),
            ("probate", "probat"),
            ("rate", "rate"),
            ("controll", "control"),
            ("roll", "roll"),
        ] {
            assert_eq!(stem(input), expected, "stem({input:?})");
        }
    }

    #[test]
    fn fixpoint_strips_stacked_suffixes() {
        // single-pass Porter leaves these endings re-strippable; the fixpoint
        // runs them to stability
        assert_eq!(stem("agreed"), "agr");
        assert_eq!(stem("decisiveness"), "deci");
        assert_eq!(stem("callousness"), "callou");
        assert_eq!(stem("defensible"), "defen");
        assert_eq!(stem("responsibilities"), "respon");
    }

    #[test]
    fn domain_examples() {
        assert_eq!(stem("people"), "peopl");
        assert_eq!(stem("gdk"), "gdk");
        assert_eq!(stem("nigga"), "nigga");
        assert_eq!(stem("money_with_wings"), "money_with_w");
    }

    #[test]
    fn short_and_non_ascii_unchanged() {
        assert_eq!(stem("go"), "go");
        assert_eq!(stem("a"), "a");
        assert_eq!(stem(""), "");
        assert_eq!(stem("café"), "café");
    }

    #[test]
    fn idempotent_on_fuzz_set() {
        use rand::Rng;
        let mut rng = crate::seeding::rng_from_seed(99);
        let mut tokens: Vec<String> = [
            "running", "classes", "studies", "nationalization", "hopefulness",
            "triplicate", "dependencies", "generalizations", "electricity",
            "probabilities", "responsibilities", "oscillators", "universities",
            "dying", "lying", "tying", "flying", "skies", "agreed", "feed",
            "decisiveness", "callousness", "cease", "defensible",
        ]
        .iter()
        .map(|w| w.to_string())
        .collect();
        while tokens.len() < 1000 {
            let len = rng.random_range(3..12);
            let token: String = (0..len)
                .map(|_| (b'a' + rng.random_range(0..26u8)) as char)
                .collect();
            tokens.push(token);
        }
        for token in &tokens {
            let once = stem(token);
            let twice = stem(&once);
            assert_eq!(once, twice, "stem not idempotent on {token:?}");
        }
    }
}
