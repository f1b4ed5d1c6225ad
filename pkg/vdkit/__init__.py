"""vdkit: pipeline de engenharia de dados e avaliação de robustez para detecção de vulnerabilidades em funções C/C++."""

__version__ = "0.1.0"
