"""Subcomandos do CLI; cada módulo registra os seus como as rotas registravam um APIRouter."""

from vdkit.commands import dataset, evaluation, perturb, prompt, slicing, views

MODULES = (dataset, views, perturb, slicing, prompt, evaluation)
