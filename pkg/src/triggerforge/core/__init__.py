from .expr import Expr, SortError, substitute, to_text
from .normal import NormalForm, normalize, to_expr
from .evaluate import Binding, EvalError, evaluate
from .symbols import Status, SymbolTable, Verdict

__all__ = [
    "Binding", "EvalError", "Expr", "NormalForm", "SortError", "Status",
    "SymbolTable", "Verdict", "evaluate", "normalize", "substitute",
    "to_expr", "to_text",
]
