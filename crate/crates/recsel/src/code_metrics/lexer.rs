//! Profile-driven lexing and nesting analysis. A profile names the comment
//! syntax, keyword lists, and nesting style (indentation or braces) of a
//! source language; the lexer classifies tokens, delimits function blocks,
//! and builds the nesting tree used as the syntax-tree stand-in.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenClass {
    /// Punctuation, arithmetic/comparison/assignment symbols, and keywords
    /// from the profile's keyword-operator list.
    Operator,
    /// Identifiers and literals.
    Operand,
    /// Keywords that are neither operators nor operands.
    Keyword,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub text: String,
    pub class: TokenClass,
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NestingStyle {
    Indentation,
    Braces,
}

/// Lexing/nesting rules for one source language.
#[derive(Debug, Clone)]
pub struct LanguageProfile {
    pub name: &'static str,
    pub line_comment: &'static str,
    pub nesting: NestingStyle,
    /// Keywords counted as operators in Halstead/token accounting.
    pub keyword_operators: &'static [&'static str],
    /// Remaining reserved words (classified `Keyword`, not counted).
    pub keywords: &'static [&'static str],
    /// Tokens (keywords or operator symbols) that are decision points.
    pub decision_tokens: &'static [&'static str],
    /// Keywords that open a function definition block.
    pub function_keywords: &'static [&'static str],
}

pub fn python_profile() -> LanguageProfile {
    LanguageProfile {
        name: "python",
        line_comment: "#",
        nesting: NestingStyle::Indentation,
        keyword_operators: &[
            "and", "or", "not", "in", "is", "if", "else", "elif", "for", "while", "return",
            "def", "class", "import", "from", "with", "as", "try", "except", "finally",
            "raise", "lambda", "yield", "assert", "del", "pass", "break", "continue", "global",
        ],
        keywords: &["None", "True", "False"],
        decision_tokens: &["if", "elif", "for", "while", "except", "and", "or"],
        function_keywords: &["def"],
    }
}

pub fn rust_profile() -> LanguageProfile {
    LanguageProfile {
        name: "rust",
        line_comment: "//",
        nesting: NestingStyle::Braces,
        keyword_operators: &[
            "fn", "let", "mut", "if", "else", "match", "for", "while", "loop", "return",
            "impl", "struct", "enum", "trait", "pub", "use", "mod", "in", "as", "break",
            "continue", "ref", "move", "where",
        ],
        keywords: &["self", "Self", "true", "false"],
        decision_tokens: &["if", "for", "while", "match", "&&", "||"],
        function_keywords: &["fn"],
    }
}

pub fn profile_by_name(name: &str) -> Result<LanguageProfile> {
    match name {
        "python" => Ok(python_profile()),
        "rust" => Ok(rust_profile()),
        other => Err(Error::InvalidArgument(format!(
            "unknown language profile {other:?} (available: python, rust)"
        ))),
    }
}

/// Multi-character operator symbols, longest-match-first.
const MULTI_OPERATORS: &[&str] = &[
    "<<=", ">>=", "**=", "//=", "...", "->", "=>", "==", "!=", "<=", ">=", "**", "//", "<<",
    ">>", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "&&", "||", "::", "..",
];

#[derive(Debug, Clone)]
pub struct SourceLine {
    /// Leading whitespace width (tabs count as 4).
    pub indent: usize,
    /// True when the line holds at least one token after comment stripping.
    pub has_code: bool,
    pub tokens: Vec<Token>,
}

/// One lexed source file: classified tokens grouped by line.
#[derive(Debug, Clone)]
pub struct LexedFile {
    pub lines: Vec<SourceLine>,
}

fn classify_word(word: &str, profile: &LanguageProfile) -> TokenClass {
    if profile.keyword_operators.contains(&word) {
        TokenClass::Operator
    } else if profile.keywords.contains(&word) {
        TokenClass::Keyword
    } else {
        TokenClass::Operand
    }
}

/// Strips a trailing line comment, honoring single- and double-quoted string
/// literals with backslash escapes.
fn strip_comment<'a>(line: &'a str, marker: &str) -> &'a str {
    let bytes = line.as_bytes();
    let mut in_string: Option<u8> = None;
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match in_string {
            Some(q) => {
                if c == b'\\' {
                    i += 1;
                } else if c == q {
                    in_string = None;
                }
            }
            None => {
                if c == b'"' || c == b'\'' {
                    in_string = Some(c);
                } else if line[i..].starts_with(marker) {
                    return &line[..i];
                }
            }
        }
        i += 1;
    }
    line
}

fn lex_line(code: &str, line_no: usize, profile: &LanguageProfile) -> Vec<Token> {
    let mut tokens = Vec::new();
    let bytes = code.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &code[start..i];
            tokens.push(Token {
                text: word.to_string(),
                class: classify_word(word, profile),
                line: line_no,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len()
                && ((bytes[i] as char).is_ascii_alphanumeric()
                    || bytes[i] == b'.'
                    || bytes[i] == b'_')
            {
                i += 1;
            }
            tokens.push(Token {
                text: code[start..i].to_string(),
                class: TokenClass::Operand,
                line: line_no,
            });
            continue;
        }
        if c == '"' || c == '\'' {
            let quote = bytes[i];
            let start = i;
            i += 1;
            while i < bytes.len() {
                if bytes[i] == b'\\' {
                    i += 2;
                    continue;
                }
                if bytes[i] == quote {
                    i += 1;
                    break;
                }
                i += 1;
            }
            tokens.push(Token {
                text: code[start..i.min(code.len())].to_string(),
                class: TokenClass::Operand,
                line: line_no,
            });
            continue;
        }
        // operator symbols, longest match first
        let rest = &code[i..];
        let sym = MULTI_OPERATORS
            .iter()
            .find(|op| rest.starts_with(**op))
            .map(|op| op.len())
            .unwrap_or(1);
        tokens.push(Token {
            text: code[i..i + sym].to_string(),
            class: TokenClass::Operator,
            line: line_no,
        });
        i += sym;
    }
    tokens
}

fn indent_width(line: &str) -> usize {
    line.chars()
        .take_while(|c| *c == ' ' || *c == '\t')
        .map(|c| if c == '\t' { 4 } else { 1 })
        .sum()
}

pub fn lex(source: &str, profile: &LanguageProfile) -> LexedFile {
    let mut lines = Vec::new();
    for (idx, raw) in source.lines().enumerate() {
        let code = strip_comment(raw, profile.line_comment);
        let tokens = lex_line(code, idx + 1, profile);
        lines.push(SourceLine {
            indent: indent_width(raw),
            has_code: !tokens.is_empty(),
            tokens,
        });
    }
    LexedFile { lines }
}

/// The nesting tree: node 0 is the file root; every code line contributes
/// one node whose parent is the innermost enclosing scope.
#[derive(Debug, Clone)]
pub struct NestingTree {
    /// children[n] lists the child node ids of node n.
    pub children: Vec<Vec<usize>>,
}

impl NestingTree {
    pub fn n_nodes(&self) -> usize {
        self.children.len()
    }
}

/// Builds the nesting tree from indentation or brace depth. Returns a parse
/// error naming the line on unbalanced closing braces.
pub fn nesting_tree(file: &LexedFile, style: NestingStyle) -> Result<NestingTree> {
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    // stack of (nesting level, node id); root sits below every level
    let mut stack: Vec<(i64, usize)> = vec![(-1, 0)];
    let mut brace_depth: i64 = 0;
    for (idx, line) in file.lines.iter().enumerate() {
        if !line.has_code {
            continue;
        }
        let level = match style {
            NestingStyle::Indentation => line.indent as i64,
            NestingStyle::Braces => {
                // depth at the first token of the line: a leading closer
                // dedents the line itself
                let mut depth = brace_depth;
                if line.tokens.first().map(|t| t.text == "}") == Some(true) {
                    depth -= 1;
                }
                if depth < 0 {
                    return Err(Error::Parse {
                        line: idx + 1,
                        msg: "unbalanced closing brace".into(),
                    });
                }
                depth
            }
        };
        while stack.last().unwrap().0 >= level {
            stack.pop();
        }
        let parent = stack.last().unwrap().1;
        let node = children.len();
        children.push(Vec::new());
        children[parent].push(node);
        stack.push((level, node));
        if style == NestingStyle::Braces {
            for t in &line.tokens {
                match t.text.as_str() {
                    "{" => brace_depth += 1,
                    "}" => {
                        brace_depth -= 1;
                        if brace_depth < 0 {
                            return Err(Error::Parse {
                                line: idx + 1,
                                msg: "unbalanced closing brace".into(),
                            });
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(NestingTree { children })
}

/// A function block: decision-point count for the block's token range.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub start_line: usize,
    pub decision_points: usize,
}

/// Function blocks, delimited by the profile's function keywords. A block
/// extends over all following lines nested deeper than its definition line.
pub fn function_blocks(file: &LexedFile, profile: &LanguageProfile) -> Vec<Block> {
    // per-line nesting level, mirroring nesting_tree
    let mut levels: Vec<Option<i64>> = Vec::with_capacity(file.lines.len());
    let mut brace_depth: i64 = 0;
    for line in &file.lines {
        if !line.has_code {
            levels.push(None);
            continue;
        }
        let level = match profile.nesting {
            NestingStyle::Indentation => line.indent as i64,
            NestingStyle::Braces => {
                let mut depth = brace_depth;
                if line.tokens.first().map(|t| t.text == "}") == Some(true) {
                    depth -= 1;
                }
                for t in &line.tokens {
                    match t.text.as_str() {
                        "{" => brace_depth += 1,
                        "}" => brace_depth -= 1,
                        _ => {}
                    }
                }
                depth
            }
        };
        levels.push(Some(level));
    }

    let is_decision = |t: &Token| profile.decision_tokens.contains(&t.text.as_str());
    let mut blocks = Vec::new();
    for (idx, line) in file.lines.iter().enumerate() {
        let starts_function = line
            .tokens
            .first()
            .map(|t| profile.function_keywords.contains(&t.text.as_str()))
            .unwrap_or(false);
        if !starts_function {
            continue;
        }
        let def_level = levels[idx].unwrap();
        let mut decisions = line.tokens.iter().skip(1).filter(|t| is_decision(t)).count();
        for j in idx + 1..file.lines.len() {
            match levels[j] {
                None => continue,
                Some(l) if l > def_level => {
                    decisions += file.lines[j].tokens.iter().filter(|t| is_decision(t)).count();
                }
                Some(_) => break,
            }
        }
        blocks.push(Block {
            start_line: idx + 1,
            decision_points: decisions,
        });
    }
    blocks
}
