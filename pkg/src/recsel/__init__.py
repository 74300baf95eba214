"""recsel: recommender-algorithm selection from whole-graph representations.

Pipeline: rating data becomes a weighted bipartite user-item graph,
reduced by random-walk sampling; Weisfeiler-Lehman relabeling turns each
graph into a document of neighborhood tokens; skipgram training with
negative sampling learns one dense vector per dataset; those vectors
(or classic statistical metafeatures) feed a KNN label ranker that
predicts, for a new dataset, the ranking of collaborative-filtering
algorithms by held-out performance.
"""

__version__ = "0.1.0"
